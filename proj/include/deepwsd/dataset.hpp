#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepwsd/binary_io.hpp"
#include "deepwsd/csv.hpp"
#include "deepwsd/errors.hpp"
#include "deepwsd/logistic.hpp"
#include "deepwsd/pipeline.hpp"
#include "deepwsd/stats.hpp"

namespace deepwsd {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

} // namespace detail

struct ManifestRow {
    std::string ref_path;  // as written in the manifest
    std::string dist_path;
    std::string mos_text;
    double mos = 0.0;
};

struct Manifest {
    std::filesystem::path base_dir;
    std::vector<ManifestRow> rows;

    std::filesystem::path resolve(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    }
};

/// Parses a `ref_path,dist_path,mos` manifest. Any structural problem aborts
/// with FormatError.
inline Manifest parse_manifest(std::string_view text, std::filesystem::path base_dir) {
    const auto rows = csv::parse(text);
    if (rows.empty())
        throw FormatError("manifest is empty (missing header)");
    const std::vector<std::string> header{"ref_path", "dist_path", "mos"};
    std::vector<std::string> got;
    for (const auto& f : rows[0])
        got.emplace_back(detail::trim(f));
    if (got != header)
        throw FormatError("manifest header must be 'ref_path,dist_path,mos'");

    Manifest m;
    m.base_dir = std::move(base_dir);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 3)
            throw FormatError("manifest line " + std::to_string(i + 1) + ": expected 3 fields, got " +
                              std::to_string(r.size()));
        const auto mos = detail::parse_double(r[2]);
        if (!mos || !std::isfinite(*mos))
            throw FormatError("manifest line " + std::to_string(i + 1) + ": invalid MOS '" + r[2] + "'");
        m.rows.push_back({std::string(detail::trim(r[0])), std::string(detail::trim(r[1])),
                          std::string(detail::trim(r[2])), *mos});
    }
    return m;
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return parse_manifest(std::string_view(bytes.data(), bytes.size()), path.parent_path());
}

struct BatchRow {
    ManifestRow source;
    std::optional<double> score;
    std::string error;
};

/// Scores every manifest row. Rows run on `threads` workers (0 picks the
/// hardware concurrency); results keep manifest order. Per-row failures are
/// recorded, not thrown.
inline std::vector<BatchRow> run_batch(const Manifest& manifest, const WeightArchive* weights,
                                       const MetricConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    std::vector<BatchRow> out(manifest.rows.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < out.size(); i = next++) {
            const auto& row = manifest.rows[i];
            out[i].source = row;
            try {
                const auto b = score_files(manifest.resolve(row.ref_path),
                                           manifest.resolve(row.dist_path), weights, cfg);
                out[i].score = b.score;
            } catch (const std::exception& e) {
                out[i].error = detail::one_line(e.what());
            }
        }
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, out.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    return out;
}

/// Scores CSV text. The `error` column is appended only when some row failed.
inline std::string format_scores_csv(const std::vector<BatchRow>& rows) {
    const bool any_failed =
        std::any_of(rows.begin(), rows.end(), [](const BatchRow& r) { return !r.score; });
    std::vector<std::string> header{"ref_path", "dist_path", "mos", "score"};
    if (any_failed)
        header.emplace_back("error");
    std::string text = csv::join(header) + "\n";
    for (const auto& r : rows) {
        std::vector<std::string> fields{r.source.ref_path, r.source.dist_path, r.source.mos_text,
                                        r.score ? detail::format_g9(*r.score) : std::string()};
        if (any_failed)
            fields.push_back(r.error);
        text += csv::join(fields) + "\n";
    }
    return text;
}

/// Reads a scores CSV, keeping only successfully scored rows.
inline std::vector<ScoredPair> parse_scores_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty())
        throw FormatError("scores CSV is empty (missing header)");
    const auto& h = rows[0];
    if (h.size() < 4 || detail::trim(h[0]) != "ref_path" || detail::trim(h[1]) != "dist_path" ||
        detail::trim(h[2]) != "mos" || detail::trim(h[3]) != "score")
        throw FormatError("scores CSV header must start with 'ref_path,dist_path,mos,score'");
    const bool has_error = h.size() >= 5 && detail::trim(h[4]) == "error";

    std::vector<ScoredPair> pairs;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 4)
            throw FormatError("scores CSV line " + std::to_string(i + 1) + ": too few fields");
        if (has_error && r.size() >= 5 && !detail::trim(r[4]).empty())
            continue;
        const auto mos = detail::parse_double(r[2]);
        const auto score = detail::parse_double(r[3]);
        if (!mos || !score)
            throw FormatError("scores CSV line " + std::to_string(i + 1) + ": unparsable number");
        if (!std::isfinite(*mos) || !std::isfinite(*score))
            continue;
        pairs.push_back({r[0], r[1], *score, *mos});
    }
    return pairs;
}

inline std::vector<ScoredPair> read_scores_csv(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return parse_scores_csv(std::string_view(bytes.data(), bytes.size()));
}

struct EvalReport {
    double plcc_raw = 0.0;
    double plcc_fitted = 0.0;
    double srcc = 0.0;
    double krcc = 0.0;
    double r_fit = 0.0;
    LogisticParams params;
    std::size_t n_pairs = 0;
    std::vector<double> fitted;
};

/// Logistic mapping, correlations and goodness of fit for scored pairs.
inline EvalReport evaluate(std::span<const ScoredPair> pairs) {
    if (pairs.size() < 5)
        throw DegenerateDataError("evaluation needs at least 5 scored rows, got " +
                                  std::to_string(pairs.size()));
    std::vector<double> raw, mos;
    for (const auto& p : pairs) {
        raw.push_back(p.raw_score);
        mos.push_back(p.mos);
    }
    const auto fit = fit_logistic(raw, mos);
    EvalReport r;
    r.params = fit.params;
    r.plcc_raw = plcc(raw, mos);
    r.plcc_fitted = plcc(fit.fitted, mos);
    r.srcc = srcc(raw, mos);
    r.krcc = krcc(raw, mos);
    r.r_fit = goodness_r(fit.fitted, mos);
    r.n_pairs = pairs.size();
    r.fitted = fit.fitted;
    return r;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["plcc_raw"] = r.plcc_raw;
    j["plcc_fitted"] = r.plcc_fitted;
    j["srcc"] = r.srcc;
    j["krcc"] = r.krcc;
    j["r_fit"] = r.r_fit;
    j["params"] = {{"a1", r.params.a1}, {"a2", r.params.a2}, {"a3", r.params.a3}, {"a4", r.params.a4}};
    j["n_pairs"] = r.n_pairs;
    return j;
}

// ---------------------------------------------------------------------------
// Golden fixtures: input.dwt (0..1 image) plus stage1.dwt .. stage5.dwt.

inline constexpr std::string_view kFixtureInput = "input.dwt";

inline std::filesystem::path fixture_stage_path(const std::filesystem::path& dir, std::size_t stage) {
    return dir / ("stage" + std::to_string(stage) + ".dwt");
}

/// Writes fixtures computed by this library's forward pass.
inline void write_fixtures(const std::filesystem::path& dir, const ImageTensor& unit_input,
                           const WeightArchive& weights) {
    std::filesystem::create_directories(dir);
    const auto stack = extract_features(unit_input, weights);
    write_tensor(dir / kFixtureInput, to_tensor(stack.stages[0]));
    for (std::size_t s = 1; s < kStageCount; ++s)
        write_tensor(fixture_stage_path(dir, s), to_tensor(stack.stages[s]));
}

struct FixtureReport {
    std::array<double, kStageCount> max_rel_error{};
    std::array<bool, kStageCount> passed{};
    bool all_passed = false;
};

/// max |got - expected| / max |expected| over one stage tensor.
inline double normwise_relative_error(std::span<const float> got, std::span<const float> expected) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        diff = std::max(diff, std::abs(static_cast<double>(got[i]) - expected[i]));
        scale = std::max(scale, std::abs(static_cast<double>(expected[i])));
    }
    if (scale == 0.0)
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / scale;
}

/// Recomputes stages 1..5 from the fixture input and compares them.
inline FixtureReport verify_fixtures(const std::filesystem::path& dir, const WeightArchive& weights,
                                     double tolerance = 1e-4) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("fixture directory " + dir.string() + " does not exist");
    const auto input_path = dir / kFixtureInput;
    if (!std::filesystem::exists(input_path))
        throw IoError("fixture input " + input_path.string() + " is missing");
    std::array<ImageTensor, kStageCount> expected;
    for (std::size_t s = 1; s < kStageCount; ++s) {
        const auto p = fixture_stage_path(dir, s);
        if (!std::filesystem::exists(p))
            throw IoError("fixture " + p.string() + " is missing");
        expected[s] = to_image(read_tensor(p));
    }

    const auto stack = extract_features(to_image(read_tensor(input_path)), weights);
    FixtureReport rep;
    rep.passed[0] = true;
    rep.all_passed = true;
    for (std::size_t s = 1; s < kStageCount; ++s) {
        if (!stack.stages[s].same_shape(expected[s])) {
            rep.max_rel_error[s] = std::numeric_limits<double>::infinity();
        } else {
            rep.max_rel_error[s] = normwise_relative_error(stack.stages[s].data(), expected[s].data());
        }
        rep.passed[s] = rep.max_rel_error[s] <= tolerance;
        rep.all_passed = rep.all_passed && rep.passed[s];
    }
    return rep;
}

} // namespace deepwsd
