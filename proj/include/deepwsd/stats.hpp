#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "deepwsd/errors.hpp"

namespace deepwsd {

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
    if (x.size() != y.size())
        throw DimensionError(std::string(what) + ": arrays differ in length (" +
                             std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 3)
        throw DegenerateDataError(std::string(what) + " needs at least 3 observations");
}

inline double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

} // namespace detail

/// Pearson linear correlation (two-pass, mean-centered).
inline double plcc(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y, "PLCC");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateDataError("PLCC is undefined for a constant input");
    return detail::clamp_unit(sxy / std::sqrt(sxx * syy));
}

/// 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> midranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && v[order[j]] == v[order[i]])
            ++j;
        // ranks i+1 .. j averaged
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

inline double srcc(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y, "SRCC");
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return plcc(rx, ry);
}

namespace detail {

// Number of tied pairs within runs of equal keys in an already sorted range.
template <typename Eq>
std::int64_t tied_pairs(std::span<const std::size_t> order, Eq eq) {
    std::int64_t ties = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && eq(order[i], order[j]))
            ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        ties += t * (t - 1) / 2;
        i = j;
    }
    return ties;
}

// Merge sort of `idx` by key y, returning the number of strict inversions.
inline std::int64_t sort_count_inversions(std::vector<std::size_t>& idx,
                                          std::span<const double> y) {
    std::vector<std::size_t> buf(idx.size());
    std::int64_t swaps = 0;
    for (std::size_t width = 1; width < idx.size(); width *= 2) {
        for (std::size_t lo = 0; lo < idx.size(); lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, idx.size());
            const std::size_t hi = std::min(lo + 2 * width, idx.size());
            std::size_t a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (y[idx[b]] < y[idx[a]]) {
                    swaps += static_cast<std::int64_t>(mid - a);
                    buf[k++] = idx[b++];
                } else {
                    buf[k++] = idx[a++];
                }
            }
            while (a < mid)
                buf[k++] = idx[a++];
            while (b < hi)
                buf[k++] = idx[b++];
        }
        idx.swap(buf);
    }
    return swaps;
}

} // namespace detail

/// Kendall tau-b, O(n log n) (Knight's algorithm).
inline double krcc(std::span<const double> x, std::span<const double> y) {
    detail::check_pair(x, y, "KRCC");
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });

    const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t x_ties =
        detail::tied_pairs(idx, [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
    const std::int64_t joint_ties = detail::tied_pairs(idx, [&](std::size_t a, std::size_t b) {
        return x[a] == x[b] && y[a] == y[b];
    });
    const std::int64_t discordant = detail::sort_count_inversions(idx, y);
    const std::int64_t y_ties =
        detail::tied_pairs(idx, [&](std::size_t a, std::size_t b) { return y[a] == y[b]; });

    const std::int64_t untied_x = total - x_ties;
    const std::int64_t untied_y = total - y_ties;
    if (untied_x == 0 || untied_y == 0)
        throw DegenerateDataError("KRCC is undefined when one input is entirely tied");
    const std::int64_t s = total - x_ties - y_ties + joint_ties - 2 * discordant;
    return detail::clamp_unit(static_cast<double>(s) /
                              std::sqrt(static_cast<double>(untied_x) * static_cast<double>(untied_y)));
}

/// Goodness of fit R = sqrt(1 - RSS/TSS), clamped at 0.
inline double goodness_r(std::span<const double> fitted, std::span<const double> mos) {
    if (fitted.size() != mos.size())
        throw DimensionError("goodness_r: arrays differ in length");
    if (mos.empty())
        throw DegenerateDataError("goodness_r: no observations");
    const double mean = std::accumulate(mos.begin(), mos.end(), 0.0) / static_cast<double>(mos.size());
    double rss = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < mos.size(); ++i) {
        rss += (mos[i] - fitted[i]) * (mos[i] - fitted[i]);
        tss += (mos[i] - mean) * (mos[i] - mean);
    }
    if (tss == 0.0)
        throw DegenerateDataError("goodness_r: MOS values are constant");
    return std::sqrt(std::max(0.0, 1.0 - rss / tss));
}

} // namespace deepwsd
