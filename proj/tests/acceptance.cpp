// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "cli_runner.hpp"
#include "deepwsd/deepwsd.hpp"
#include "oracles.hpp"

using namespace deepwsd;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> normal_sample(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v)
        x = d(rng);
    return v;
}

double w2(const std::vector<double>& a, const std::vector<double>& b) {
    return wasserstein_1d(PatchQuantiles::from_samples(a), PatchQuantiles::from_samples(b), 2);
}

const WeightArchive& seed7() {
    static const WeightArchive archive(make_test_weights(7));
    return archive;
}

Outcome metric_axioms() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    Outcome o;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = normal_sample(rng, 16), y = normal_sample(rng, 16), z = normal_sample(rng, 16);
        const double xy = w2(x, y), yx = w2(y, x), xz = w2(x, z), zy = w2(z, y), xx = w2(x, x);
        if (xy < -1e-9 || std::abs(xy - yx) > 1e-9 || std::abs(xx) > 1e-9 || xy > xz + zy + 1e-9)
            ++bad;
    }
    const double secs = seconds_since(t0);
    o.pass = bad == 0 && secs < 5.0;
    o.detail = std::to_string(bad) + " violations in 1000 triples, " + fmt("%.3f s", secs);
    return o;
}

Outcome brute_force_optimality() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(102);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + i % 6;
        const auto a = normal_sample(rng, n), b = normal_sample(rng, n);
        if (w2(a, b) != oracle::brute_force_assignment(a, b, 2))
            ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0,
            std::to_string(mismatches) + " mismatches in 200 pairs, " + fmt("%.3f s", secs)};
}

Outcome translation() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> uc(-50.0, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto x = normal_sample(rng, 1 + i % 32);
        const double c = uc(rng);
        auto y = x;
        for (double& v : y)
            v += c;
        worst = std::max(worst, std::abs(w2(x, y) - std::abs(c)));
    }
    return {worst <= 1e-9, "max |W(X, X+c) - |c|| = " + fmt("%.3e", worst)};
}

Outcome g_weight_values() {
    const double g0 = g_weight(0.0);
    bool decreasing = true;
    double prev = g0;
    for (int i = 1; i < 10000; ++i) {
        const double g = g_weight(1000.0 * i / 9999.0);
        decreasing = decreasing && g < prev;
        prev = g;
    }
    return {std::abs(g0 - 0.0105127) <= 1e-6 && decreasing,
            "g(0) = " + fmt("%.10f", g0) + (decreasing ? ", strictly decreasing" : ", NOT decreasing")};
}

Outcome identity_score() {
    const auto img = oracle::natural_image(11, 64, 64);
    const double s = score_images(img, img, &seed7(), MetricConfig{}).score;
    return {s == std::log(1e-12), "score = " + fmt("%.17g", s)};
}

Outcome monotone_degradation() {
    const auto t0 = Clock::now();
    const double sigmas[] = {5, 10, 20, 40};
    int violations = 0;
    std::ostringstream scores;
    for (std::uint32_t k = 0; k < 5; ++k) {
        const auto ref = oracle::natural_image(200 + k, 64 + 16 * k, 96);
        double prev = -std::numeric_limits<double>::infinity();
        scores << (k ? " | " : "");
        for (double sigma : sigmas) {
            const auto dist = oracle::add_gaussian_noise(ref, sigma, 300 + k);
            const double s = score_images(ref, dist, &seed7(), MetricConfig{}).score;
            if (!(s > prev))
                ++violations;
            prev = s;
            scores << fmt(" %.3f", s);
        }
    }
    const double secs = seconds_since(t0);
    return {violations == 0 && secs < 60.0,
            std::to_string(violations) + " violations, " + fmt("%.2f s;", secs) + scores.str()};
}

Outcome correlation_oracles() {
    std::mt19937_64 rng(104);
    int krcc_bad = 0;
    double srcc_worst = 0.0;
    int checked = 0;
    for (int i = 0; checked < 500; ++i) {
        const std::size_t n = 3 + i % 6;
        std::uniform_int_distribution<int> lv(0, 1 + i % 5);
        std::vector<double> x(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            x[j] = lv(rng);
            y[j] = lv(rng);
        }
        const double want = oracle::kendall_tau_b_pairs(x, y);
        if (std::isnan(want))
            continue;
        ++checked;
        if (krcc(x, y) != want)
            ++krcc_bad;
        const double sw = oracle::pearson(oracle::count_ranks(x), oracle::count_ranks(y));
        if (std::isfinite(sw))
            srcc_worst = std::max(srcc_worst, std::abs(srcc(x, y) - sw));
    }
    const std::vector<double> a{1, 2, 3}, b{6, 4, 5};
    const double p = plcc(a, b);
    const bool ok = krcc_bad == 0 && srcc_worst <= 1e-12 && std::abs(p + 0.5) <= 1e-12;
    return {ok, "krcc mismatches " + std::to_string(krcc_bad) + "/500, srcc max err " +
                    fmt("%.2e", srcc_worst) + ", plcc example " + fmt("%.17g", p)};
}

Outcome logistic_fit() {
    const LogisticParams truth{9.0, 1.0, 0.0, 1.0};
    std::vector<double> d, clean;
    for (int i = 0; i < 50; ++i) {
        d.push_back(-5.0 + 10.0 * i / 49.0);
        clean.push_back(truth(d.back()));
    }
    const auto rmse = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s / static_cast<double>(a.size()));
    };
    const auto exact = fit_logistic(d, clean);
    const double exact_rmse = rmse(exact.fitted, clean);
    const double r = goodness_r(exact.fitted, clean);
    double noisy_worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.0, 0.1);
        auto mos = clean;
        for (double& v : mos)
            v += n(rng);
        const auto fit = fit_logistic(d, mos);
        noisy_worst = std::max(noisy_worst, rmse(fit.fitted, mos));
    }
    return {exact_rmse < 1e-6 && noisy_worst <= 0.15 && std::abs(r - 1.0) <= 1e-6,
            "exact rmse " + fmt("%.2e", exact_rmse) + ", noisy max rmse " + fmt("%.4f", noisy_worst) +
                ", R " + fmt("%.12f", r)};
}

Outcome inference_core() {
    std::mt19937 rng(105);
    double worst = 0.0;
    for (std::uint32_t i = 0; i < 50; ++i) {
        const std::uint32_t cin = 1 + rng() % 8, cout = 1 + rng() % 8;
        const std::size_t h = 1 + rng() % 12, w = 1 + rng() % 12;
        const auto in = oracle::random_tensor(cin, h, w, 1000 + i);
        const auto kimg = oracle::random_tensor(cout * cin, 3, 3, 2000 + i);
        const Tensor k({cout, cin, 3, 3}, std::vector<float>(kimg.data().begin(), kimg.data().end()));
        const auto bimg = oracle::random_tensor(cout, 1, 1, 3000 + i);
        const std::vector<float> bias(bimg.data().begin(), bimg.data().end());
        const auto want = oracle::naive_conv3x3(in, k, bias);
        const auto got = conv2d(in, k, bias);
        worst = std::max(worst, got.same_shape(want)
                                    ? oracle::normwise_rel_error(got.data(), want.data())
                                    : std::numeric_limits<double>::infinity());
    }
    const auto stack = extract_features(oracle::random_tensor(3, 64, 64, 7, 0.0f, 1.0f), seed7());
    const std::size_t channels[] = {3, 64, 128, 256, 512, 512};
    const std::size_t divisor[] = {1, 1, 2, 4, 8, 16};
    bool shapes = true;
    for (std::size_t s = 0; s < kStageCount; ++s)
        shapes = shapes && stack.stages[s].channels() == channels[s] &&
                 stack.stages[s].height() == 64 / divisor[s] && stack.stages[s].width() == 64 / divisor[s];
    return {worst <= 1e-6 && shapes, "conv2d max rel err " + fmt("%.2e", worst) +
                                         (shapes ? ", shape table exact" : ", shape table WRONG")};
}

Outcome batch_determinism() {
    oracle::TempDir dir("acceptance");
    gen_test_weights(7, dir / "w.bin");
    std::string manifest = "ref_path,dist_path,mos\n";
    for (std::uint32_t i = 0; i < 10; ++i) {
        const auto ref = oracle::natural_image(400 + i % 3, 48, 48);
        const std::string r = "ref" + std::to_string(i % 3) + ".png";
        const std::string d = "dist" + std::to_string(i) + ".png";
        write_png(dir / r, ref);
        write_png(dir / d, oracle::add_gaussian_noise(ref, 3.0 + 4.0 * i, 500 + i));
        manifest += r + "," + d + "," + std::to_string(5 - 0.4 * i) + "\n";
    }
    write_file_bytes(dir / "m.csv", std::span<const char>(manifest.data(), manifest.size()));
    const std::string args = "batch --manifest " + cli::quote((dir / "m.csv").string()) +
                             " --weights " + cli::quote((dir / "w.bin").string()) + " --out ";
    const auto a = cli::run(dir.path(), args + cli::quote((dir / "a.csv").string()));
    const auto b = cli::run(dir.path(), args + cli::quote((dir / "b.csv").string()));
    const auto ta = cli::slurp(dir / "a.csv"), tb = cli::slurp(dir / "b.csv");
    const bool ok = a.exit_code == 0 && b.exit_code == 0 && !ta.empty() && ta == tb &&
                    parse_scores_csv(ta).size() == 10;
    return {ok, "exit codes " + std::to_string(a.exit_code) + "/" + std::to_string(b.exit_code) + ", " +
                    std::to_string(ta.size()) + " bytes, " + (ta == tb ? "identical" : "DIFFERENT")};
}

Outcome performance() {
    const auto ref = oracle::natural_image(600, 512, 512);
    const auto dist = oracle::add_gaussian_noise(ref, 10, 601);
    const auto t0 = Clock::now();
    const double s = score_images(ref, dist, &seed7(), MetricConfig{}).score;
    const double secs = seconds_since(t0);
    return {std::isfinite(s) && secs < 10.0, "512x512 pair " + fmt("%.2f s", secs)};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"metric-axioms", metric_axioms},
        {"ot-optimality-oracle", brute_force_optimality},
        {"translation-property", translation},
        {"g-weight", g_weight_values},
        {"identity-score", identity_score},
        {"monotone-degradation", monotone_degradation},
        {"correlation-oracles", correlation_oracles},
        {"logistic-fit", logistic_fit},
        {"inference-core-oracle", inference_core},
        {"batch-determinism", batch_determinism},
        {"performance-512", performance},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
                std::size(criteria));
    return failed == 0 ? 0 : 1;
}
