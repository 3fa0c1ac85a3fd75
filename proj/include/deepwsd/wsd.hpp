#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepwsd/backbone.hpp"
#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"

namespace deepwsd {

/// Empirical quantile function of a sample: the order statistics, ascending.
/// Entry i (0-based) is the quantile on z in (i/n, (i+1)/n].
class PatchQuantiles {
public:
    static PatchQuantiles from_samples(std::vector<double> samples) {
        std::sort(samples.begin(), samples.end());
        return PatchQuantiles(std::move(samples));
    }

    static PatchQuantiles from_sorted(std::vector<double> sorted) {
        if (!std::is_sorted(sorted.begin(), sorted.end()))
            throw std::invalid_argument("PatchQuantiles::from_sorted: values are not ascending");
        return PatchQuantiles(std::move(sorted));
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    explicit PatchQuantiles(std::vector<double> v) : values_(std::move(v)) {
        if (values_.empty())
            throw DimensionError("a patch needs at least one sample");
    }

    std::vector<double> values_;
};

struct MetricConfig {
    int order = 2;
    std::size_t patch_size = 4;
    bool use_adaptive_weight = true;
    bool use_pixel_stage = true;
    bool use_feature_stages = true;
    bool use_euclidean_term = true;
    double log_epsilon = 1e-12;

    void validate() const {
        if (order != 1 && order != 2)
            throw ConfigError("Wasserstein order must be 1 or 2, got " + std::to_string(order));
        if (patch_size == 0)
            throw ConfigError("patch size must be positive");
        if (!use_pixel_stage && !use_feature_stages)
            throw ConfigError("at least one of the pixel stage or the feature stages must be enabled");
        if (!(log_epsilon > 0.0))
            throw ConfigError("log epsilon must be positive");
    }

    bool stage_active(std::size_t stage) const noexcept {
        return stage == 0 ? use_pixel_stage : use_feature_stages;
    }
};

struct ScoreBreakdown {
    std::array<double, kStageCount> per_stage_wsd{};
    std::array<double, kStageCount> per_stage_eul{};
    std::array<double, kStageCount> per_stage_g{};
    std::array<bool, kStageCount> active{};
    double d_wsd = 0.0;
    double d_eul = 0.0;
    double score = 0.0;
};

/// Order-l distance between two sorted samples of equal size:
/// ((1/n) * sum |a_i - b_i|^l)^(1/l), accumulated in double in index order.
template <typename T>
double wasserstein_sorted(std::span<const T> a, std::span<const T> b, int order) {
    if (a.size() != b.size())
        throw DimensionError("Wasserstein distance needs equal sample counts, got " +
                             std::to_string(a.size()) + " and " + std::to_string(b.size()));
    if (a.empty())
        throw DimensionError("Wasserstein distance of empty samples");
    double sum = 0.0;
    if (order == 2) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            sum += d * d;
        }
        return std::sqrt(sum / static_cast<double>(a.size()));
    }
    if (order == 1) {
        for (std::size_t i = 0; i < a.size(); ++i)
            sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
        return sum / static_cast<double>(a.size());
    }
    throw ConfigError("Wasserstein order must be 1 or 2, got " + std::to_string(order));
}

inline double wasserstein_1d(const PatchQuantiles& a, const PatchQuantiles& b, int order) {
    return wasserstein_sorted(a.values(), b.values(), order);
}

/// Mean patchwise Wasserstein distance between two same-shaped tensors. Each
/// channel is tiled into non-overlapping patch x patch blocks (partial blocks at
/// the bottom/right are dropped) and corresponding blocks are compared.
inline double stage_wsd(const ImageTensor& p, const ImageTensor& q, const MetricConfig& cfg) {
    if (!p.same_shape(q))
        throw DimensionError("stage tensors differ in shape: " + p.shape_string() + " vs " +
                             q.shape_string());
    const std::size_t k = cfg.patch_size;
    if (k == 0)
        throw ConfigError("patch size must be positive");
    if (p.height() < k || p.width() < k)
        throw DimensionError("tensor " + p.shape_string() + " is smaller than the " +
                             std::to_string(k) + "x" + std::to_string(k) + " patch");

    const std::size_t by = p.height() / k;
    const std::size_t bx = p.width() / k;
    std::vector<float> pa(k * k);
    std::vector<float> qa(k * k);
    double total = 0.0;
    for (std::size_t c = 0; c < p.channels(); ++c) {
        for (std::size_t iy = 0; iy < by; ++iy) {
            for (std::size_t ix = 0; ix < bx; ++ix) {
                std::size_t n = 0;
                for (std::size_t y = iy * k; y < (iy + 1) * k; ++y) {
                    for (std::size_t x = ix * k; x < (ix + 1) * k; ++x, ++n) {
                        pa[n] = p.at(c, y, x);
                        qa[n] = q.at(c, y, x);
                    }
                }
                std::sort(pa.begin(), pa.end());
                std::sort(qa.begin(), qa.end());
                total += wasserstein_sorted<float>(pa, qa, cfg.order);
            }
        }
    }
    return total / static_cast<double>(p.channels() * by * bx);
}

/// Adaptive weight on the Euclidean term: 1 / ((s+10)^2 * sqrt(exp(-1/(s+10)))).
inline double g_weight(double s) {
    if (!(s >= 0.0))
        throw std::domain_error("g_weight is defined for s >= 0");
    const double t = s + 10.0;
    return 1.0 / (t * t * std::sqrt(std::exp(-1.0 / t)));
}

/// Unnormalized L2 norm of the flattened difference.
inline double euclidean_norm(const ImageTensor& p, const ImageTensor& q) {
    if (!p.same_shape(q))
        throw DimensionError("tensors differ in shape: " + p.shape_string() + " vs " +
                             q.shape_string());
    const auto a = p.data();
    const auto b = q.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Final score from the two aggregate terms. The divisor is the total number of
/// stages, independent of which stages are enabled.
inline double score_from_terms(double d_wsd, double d_eul, double log_epsilon) {
    return std::log(std::max(log_epsilon, (d_wsd + d_eul) / static_cast<double>(kStageCount)));
}

/// Patch side used for a stage: the configured size, shrunk to fit stages
/// smaller than one patch (deep stages of small inputs).
inline std::size_t effective_patch_size(const ImageTensor& t, std::size_t patch_size) {
    return std::min({patch_size, t.height(), t.width()});
}

/// Scores a distorted stack against a reference stack. Higher means worse.
inline ScoreBreakdown deepwsd_score(const FeatureStack& ref, const FeatureStack& dist,
                                    const MetricConfig& cfg) {
    cfg.validate();
    ScoreBreakdown out;
    for (std::size_t i = 0; i < kStageCount; ++i) {
        if (!cfg.stage_active(i))
            continue;
        const ImageTensor& p = ref.stages[i];
        const ImageTensor& q = dist.stages[i];
        if (p.empty() || !p.same_shape(q))
            throw DimensionError("stage " + std::to_string(i) + " (" + std::string(kStageNames[i]) +
                                 ") shape mismatch: " + (p.empty() ? "empty" : p.shape_string()) +
                                 " vs " + (q.empty() ? "empty" : q.shape_string()));
        MetricConfig stage_cfg = cfg;
        stage_cfg.patch_size = effective_patch_size(p, cfg.patch_size);
        const double w = stage_wsd(p, q, stage_cfg);
        const double e = euclidean_norm(p, q);
        const double g = cfg.use_adaptive_weight ? g_weight(w) : 1.0;
        out.active[i] = true;
        out.per_stage_wsd[i] = w;
        out.per_stage_eul[i] = e;
        out.per_stage_g[i] = g;
        out.d_wsd += w;
        if (cfg.use_euclidean_term)
            out.d_eul += g * e;
    }
    out.score = score_from_terms(out.d_wsd, out.d_eul, cfg.log_epsilon);
    return out;
}

} // namespace deepwsd
