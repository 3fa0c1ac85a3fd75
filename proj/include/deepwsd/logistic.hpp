#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "deepwsd/errors.hpp"
#include "deepwsd/nelder_mead.hpp"

namespace deepwsd {

struct ScoredPair {
    std::string ref_id;
    std::string dist_id;
    double raw_score = 0.0;
    double mos = 0.0;
};

/// Monotone four-parameter logistic mapping raw scores onto the MOS scale:
/// a2 + (a1 - a2) / (1 + exp(-(D - a3) / |a4|)).
struct LogisticParams {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 1.0;

    double operator()(double d) const noexcept {
        return (a1 - a2) / (1.0 + std::exp(-(d - a3) / std::abs(a4))) + a2;
    }
};

class FitFailure : public Error {
public:
    FitFailure(const std::string& msg, LogisticParams best)
        : Error(msg), best_(best) {}
    const LogisticParams& best() const noexcept { return best_; }

private:
    LogisticParams best_;
};

struct LogisticFit {
    LogisticParams params;
    std::vector<double> fitted;
    double sse = 0.0;
    std::size_t evaluations = 0;
    std::vector<double> objective_history;
};

/// Least-squares fit of the logistic to (raw score, MOS) data.
inline LogisticFit fit_logistic(std::span<const double> raw, std::span<const double> mos,
                                const NelderMeadOptions& opts = {}) {
    if (raw.size() != mos.size())
        throw DimensionError("fit_logistic: score and MOS arrays differ in length");
    const std::size_t n = raw.size();
    if (n < 5)
        throw DegenerateDataError("fit_logistic needs at least 5 observations, got " +
                                  std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(raw[i]) || !std::isfinite(mos[i]))
            throw DegenerateDataError("fit_logistic: non-finite score or MOS at row " +
                                      std::to_string(i));

    const auto [mos_min, mos_max] = std::minmax_element(mos.begin(), mos.end());
    if (*mos_min == *mos_max)
        throw DegenerateDataError("fit_logistic: MOS values are constant");

    std::vector<double> sorted(raw.begin(), raw.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double d : raw)
        var += (d - mean) * (d - mean);
    const double stdev = std::sqrt(var / static_cast<double>(n - 1));
    if (stdev == 0.0)
        throw DegenerateDataError("fit_logistic: raw scores are constant");

    const std::array<double, 4> start{*mos_max, *mos_min, median, stdev / 4.0};
    const double mos_range = *mos_max - *mos_min;
    const std::array<double, 4> steps{0.1 * mos_range, 0.1 * mos_range, 0.25 * stdev,
                                      0.1 * stdev};

    const auto sse = [&](const std::array<double, 4>& a) {
        if (a[3] == 0.0)
            return std::numeric_limits<double>::infinity();
        const LogisticParams p{a[0], a[1], a[2], a[3]};
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = p(raw[i]) - mos[i];
            s += r * r;
        }
        return s;
    };

    auto res = nelder_mead<4>(sse, start, steps, opts);
    LogisticParams best{res.x[0], res.x[1], res.x[2], std::abs(res.x[3])};
    if (!res.converged)
        throw FitFailure("logistic fit did not converge within " +
                             std::to_string(opts.max_evaluations) + " evaluations",
                         best);

    LogisticFit fit;
    fit.params = best;
    fit.sse = res.value;
    fit.evaluations = res.evaluations;
    fit.objective_history = std::move(res.best_history);
    fit.fitted.reserve(n);
    for (double d : raw)
        fit.fitted.push_back(best(d));
    return fit;
}

inline LogisticFit fit_logistic(std::span<const ScoredPair> pairs, const NelderMeadOptions& opts = {}) {
    std::vector<double> raw, mos;
    raw.reserve(pairs.size());
    mos.reserve(pairs.size());
    for (const auto& p : pairs) {
        raw.push_back(p.raw_score);
        mos.push_back(p.mos);
    }
    return fit_logistic(raw, mos, opts);
}

} // namespace deepwsd
