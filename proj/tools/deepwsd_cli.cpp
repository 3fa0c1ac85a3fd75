// Command-line front end: score, batch, eval, gen-test-weights, verify-fixtures.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deepwsd/deepwsd.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

struct MetricFlags {
    std::size_t patch_size = 4;
    bool no_adaptive_weight = false;
    bool no_pixel_stage = false;
    bool pixel_wsd_only = false;
    bool no_euclidean = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--patch-size", patch_size, "Patch side length")
            ->check(CLI::IsMember({4, 8, 16}))
            ->capture_default_str();
        cmd.add_flag("--no-adaptive-weight", no_adaptive_weight,
                     "Use a constant weight of 1 on the Euclidean term");
        cmd.add_flag("--no-pixel-stage", no_pixel_stage, "Drop the raw-pixel stage");
        cmd.add_flag("--pixel-wsd-only", pixel_wsd_only,
                     "Pixel-domain Wasserstein term only (no backbone, no Euclidean term)");
        cmd.add_flag("--no-euclidean", no_euclidean, "Drop the Euclidean term");
    }

    deepwsd::MetricConfig config() const {
        deepwsd::MetricConfig cfg;
        cfg.patch_size = patch_size;
        cfg.use_adaptive_weight = !no_adaptive_weight;
        cfg.use_pixel_stage = !no_pixel_stage;
        cfg.use_euclidean_term = !no_euclidean;
        if (pixel_wsd_only) {
            cfg.use_feature_stages = false;
            cfg.use_euclidean_term = false;
        }
        cfg.validate();
        return cfg;
    }
};

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<deepwsd::WeightArchive> load_weights_if_needed(const std::string& path,
                                                             const deepwsd::MetricConfig& cfg) {
    if (!cfg.use_feature_stages)
        return std::nullopt;
    if (path.empty())
        throw deepwsd::ConfigError("no weights given (use --weights or set DEEPWSD_WEIGHTS)");
    return deepwsd::load_weights(path);
}

int run_score(const std::string& ref, const std::string& dist, const std::string& weights_path,
              const MetricFlags& flags, bool breakdown) {
    const auto cfg = flags.config();
    const auto weights = load_weights_if_needed(weights_path, cfg);
    const auto b = deepwsd::score_files(ref, dist, weights ? &*weights : nullptr, cfg);
    std::cout << fmt17(b.score) << '\n';
    if (breakdown) {
        std::printf("%-8s %24s %24s %24s\n", "stage", "wsd", "euclidean", "g");
        for (std::size_t i = 0; i < deepwsd::kStageCount; ++i) {
            if (!b.active[i])
                continue;
            std::printf("%-8s %24s %24s %24s\n", std::string(deepwsd::kStageNames[i]).c_str(),
                        fmt17(b.per_stage_wsd[i]).c_str(), fmt17(b.per_stage_eul[i]).c_str(),
                        fmt17(b.per_stage_g[i]).c_str());
        }
        std::printf("d_wsd %s\nd_eul %s\nscore %s\n", fmt17(b.d_wsd).c_str(),
                    fmt17(b.d_eul).c_str(), fmt17(b.score).c_str());
    }
    return 0;
}

int run_batch(const std::string& manifest_path, const std::string& out_path,
              const std::string& weights_path, const MetricFlags& flags, unsigned threads) {
    const auto cfg = flags.config();
    const auto manifest = deepwsd::read_manifest(manifest_path);
    const auto weights = load_weights_if_needed(weights_path, cfg);
    const auto rows = deepwsd::run_batch(manifest, weights ? &*weights : nullptr, cfg, threads);
    const auto text = deepwsd::format_scores_csv(rows);
    if (out_path.empty())
        std::cout << text;
    else
        deepwsd::write_file_bytes(out_path, std::span<const char>(text.data(), text.size()));

    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (!r.score) {
            ++failed;
            std::cerr << "row failed: " << r.source.ref_path << ", " << r.source.dist_path << ": "
                      << r.error << '\n';
        }
    }
    std::cerr << "scored " << rows.size() - failed << "/" << rows.size() << " rows\n";
    return failed == 0 ? 0 : kExitPartial;
}

int run_eval(const std::string& scores_path, const std::string& out_path) {
    const auto pairs = deepwsd::read_scores_csv(scores_path);
    const auto report = deepwsd::evaluate(pairs);
    const auto text = deepwsd::to_json(report).dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        deepwsd::write_file_bytes(out_path, std::span<const char>(text.data(), text.size()));
    return 0;
}

int run_gen_weights(std::uint64_t seed, const std::string& out_path) {
    const auto archive = deepwsd::gen_test_weights(seed, out_path);
    std::printf("wrote %zu tensors to %s (seed %llu, crc32 %08x)\n", archive.size(),
                out_path.c_str(), static_cast<unsigned long long>(seed), archive.checksum());
    return 0;
}

int run_verify(const std::string& dir, const std::string& weights_path) {
    if (weights_path.empty())
        throw deepwsd::ConfigError("no weights given (use --weights or set DEEPWSD_WEIGHTS)");
    const auto weights = deepwsd::load_weights(weights_path);
    const auto rep = deepwsd::verify_fixtures(dir, weights);
    for (std::size_t s = 1; s < deepwsd::kStageCount; ++s)
        std::printf("%-8s max_rel_error %-12.4e %s\n", std::string(deepwsd::kStageNames[s]).c_str(),
                    rep.max_rel_error[s], rep.passed[s] ? "PASS" : "FAIL");
    std::printf("%s\n", rep.all_passed ? "fixtures PASS" : "fixtures FAIL");
    return rep.all_passed ? 0 : kExitError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeepWSD full-reference image quality engine"};
    app.require_subcommand(1);

    std::string ref, dist, weights, manifest, out, scores, fixtures;
    bool breakdown = false;
    unsigned threads = 1;
    std::uint64_t seed = 7;

    auto add_weights = [&](CLI::App* cmd) {
        cmd->add_option("--weights", weights, "Backbone weight archive (DWSDW1)")
            ->envname("DEEPWSD_WEIGHTS");
    };

    MetricFlags score_flags;
    auto* score = app.add_subcommand("score", "Score one distorted image against its reference");
    score->add_option("--ref", ref, "Reference image (PNG or BMP)")->required();
    score->add_option("--dist", dist, "Distorted image (PNG or BMP)")->required();
    add_weights(score);
    score_flags.attach(*score);
    score->add_flag("--breakdown", breakdown, "Print per-stage terms");

    MetricFlags batch_flags;
    auto* batch = app.add_subcommand("batch", "Score every row of a manifest CSV");
    batch->add_option("--manifest", manifest, "CSV with ref_path,dist_path,mos")->required();
    batch->add_option("--out", out, "Scores CSV (stdout if omitted)");
    add_weights(batch);
    batch_flags.attach(*batch);
    batch->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Fit the logistic mapping and report correlations");
    eval->add_option("--scores", scores, "Scores CSV produced by batch")->required();
    eval->add_option("--out", out, "Report JSON (stdout if omitted)");

    auto* gen = app.add_subcommand("gen-test-weights", "Write deterministic synthetic backbone weights");
    gen->add_option("--seed", seed, "PRNG seed")->capture_default_str();
    gen->add_option("--out", out, "Output archive path")->required();

    auto* verify = app.add_subcommand("verify-fixtures", "Check the forward pass against golden tensors");
    verify->add_option("--fixtures", fixtures, "Directory with input.dwt and stage1..5.dwt")->required();
    add_weights(verify);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*score)
            return run_score(ref, dist, weights, score_flags, breakdown);
        if (*batch)
            return run_batch(manifest, out, weights, batch_flags, threads);
        if (*eval)
            return run_eval(scores, out);
        if (*gen)
            return run_gen_weights(seed, out);
        if (*verify)
            return run_verify(fixtures, weights);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
