#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace deepwsd {

struct NelderMeadOptions {
    std::size_t max_evaluations = 40000;
    std::size_t max_restarts = 8;
    /// The simplex counts as collapsed when the objective spread over it is
    /// within ftol_abs + ftol_rel * |f_best|, or when every vertex lies within
    /// xtol_rel * (|x_best| + 1) of the best one, coordinatewise.
    double ftol_abs = 0.0;
    double ftol_rel = 1e-14;
    double xtol_rel = 1e-10;
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    bool converged = false;
    /// Best objective after every iteration; non-increasing.
    std::vector<double> best_history;
};

/// Downhill simplex minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Once the simplex collapses, it is rebuilt around the best point
/// with the initial steps; the search stops when a restart no longer improves
/// the objective beyond the tolerance.
template <std::size_t N, typename Objective>
NelderMeadResult<N> nelder_mead(Objective&& f, const std::array<double, N>& start,
                                const std::array<double, N>& steps,
                                const NelderMeadOptions& opts = {}) {
    using Point = std::array<double, N>;
    NelderMeadResult<N> res;

    const auto eval = [&](const Point& p) {
        ++res.evaluations;
        const double v = f(p);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::array<Point, N + 1> simplex{};
    std::array<double, N + 1> values{};
    std::array<std::size_t, N + 1> order{};

    const auto build = [&](const Point& base, double base_value) {
        simplex[0] = base;
        values[0] = base_value;
        for (std::size_t i = 0; i < N; ++i) {
            simplex[i + 1] = base;
            simplex[i + 1][i] += steps[i];
            values[i + 1] = eval(simplex[i + 1]);
        }
    };

    const auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    };

    const auto collapsed = [&] {
        const std::size_t best = order[0];
        const double fb = values[best];
        double fspread = 0.0;
        for (double v : values)
            fspread = std::max(fspread, v - fb);
        if (fspread <= opts.ftol_abs + opts.ftol_rel * std::abs(fb))
            return true;
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t j = 0; j < N; ++j)
                if (std::abs(simplex[i][j] - simplex[best][j]) >
                    opts.xtol_rel * (std::abs(simplex[best][j]) + 1.0))
                    return false;
        return true;
    };

    build(start, eval(start));
    sort_vertices();
    double restart_value = values[order[0]];

    while (res.evaluations < opts.max_evaluations) {
        if (collapsed()) {
            const double best = values[order[0]];
            const bool improved =
                res.restarts == 0 ||
                restart_value - best > opts.ftol_abs + opts.ftol_rel * std::abs(best);
            if (!improved || res.restarts >= opts.max_restarts) {
                res.converged = true;
                break;
            }
            ++res.restarts;
            restart_value = best;
            const Point base = simplex[order[0]];
            build(base, best);
            sort_vertices();
            continue;
        }

        const std::size_t worst = order[N];
        const std::size_t second = order[N - 1];
        const std::size_t best = order[0];

        Point centroid{};
        for (std::size_t k = 0; k < N; ++k) {
            const Point& v = simplex[order[k]];
            for (std::size_t j = 0; j < N; ++j)
                centroid[j] += v[j];
        }
        for (double& c : centroid)
            c /= static_cast<double>(N);

        const auto along = [&](double t) {
            Point p;
            for (std::size_t j = 0; j < N; ++j)
                p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
            return p;
        };

        const Point reflected = along(-1.0);
        const double fr = eval(reflected);
        if (fr < values[best]) {
            const Point expanded = along(-2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            const bool outside = fr < values[worst];
            const Point contracted = along(outside ? -0.5 : 0.5);
            const double fc = eval(contracted);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= N; ++i) {
                    if (i == best)
                        continue;
                    for (std::size_t j = 0; j < N; ++j)
                        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
        sort_vertices();
        res.best_history.push_back(values[order[0]]);
    }

    res.x = simplex[order[0]];
    res.value = values[order[0]];
    return res;
}

} // namespace deepwsd
