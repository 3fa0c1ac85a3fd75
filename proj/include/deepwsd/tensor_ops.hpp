#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"

namespace deepwsd {

namespace detail {

using RowMajorMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Upper bound on the im2col scratch buffer, in floats (16 MiB).
inline constexpr std::size_t kIm2colBudget = std::size_t{1} << 22;

// Fills `col` (rows: c*9 + dy*3 + dx, columns: pixels of rows [y0, y1)) for a
// 3x3 stride-1 convolution with zero padding 1.
inline void im2col_3x3(const ImageTensor& input, std::size_t y0, std::size_t y1,
                       std::span<float> col) {
    const std::size_t h = input.height();
    const std::size_t w = input.width();
    const std::size_t band = (y1 - y0) * w;
    for (std::size_t c = 0; c < input.channels(); ++c) {
        const auto src = input.plane(c);
        for (std::size_t dy = 0; dy < 3; ++dy) {
            for (std::size_t dx = 0; dx < 3; ++dx) {
                float* dst = col.data() + (c * 9 + dy * 3 + dx) * band;
                for (std::size_t y = y0; y < y1; ++y) {
                    float* row = dst + (y - y0) * w;
                    const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + dy) - 1;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) {
                        std::fill(row, row + w, 0.0f);
                        continue;
                    }
                    const float* srow = src.data() + static_cast<std::size_t>(sy) * w;
                    // x + dx - 1 is in range for x in [lo, hi)
                    const std::size_t lo = dx == 0 ? 1 : 0;
                    const std::size_t hi = dx == 2 ? w - 1 : w;
                    if (lo > 0)
                        row[0] = 0.0f;
                    if (hi < w)
                        row[w - 1] = 0.0f;
                    if (hi > lo)
                        std::copy(srow + lo + dx - 1, srow + hi + dx - 1, row + lo);
                }
            }
        }
    }
}

} // namespace detail

/// 3x3 convolution, stride 1, zero padding 1. `kernels` is [out x in x 3 x 3].
///
/// Implemented as im2col over horizontal bands followed by a single-precision
/// GEMM. For a fixed input shape the reduction order is fixed, so results are
/// bit-reproducible run to run.
inline ImageTensor conv2d(const ImageTensor& input, const Tensor& kernels,
                          std::span<const float> bias) {
    const auto& kd = kernels.dims();
    if (kd.size() != 4)
        throw UnsupportedShapeError("conv2d kernels must be rank 4, got rank " +
                                    std::to_string(kd.size()));
    if (kd[2] != 3 || kd[3] != 3)
        throw UnsupportedShapeError("conv2d supports 3x3 kernels only, got " +
                                    std::to_string(kd[2]) + "x" + std::to_string(kd[3]));
    if (kd[1] != input.channels())
        throw DimensionError("conv2d input has " + std::to_string(input.channels()) +
                             " channels, kernels expect " + std::to_string(kd[1]));
    if (bias.size() != kd[0])
        throw DimensionError("conv2d bias length " + std::to_string(bias.size()) +
                             " does not match " + std::to_string(kd[0]) + " output channels");

    const std::size_t out_ch = kd[0];
    const std::size_t depth = static_cast<std::size_t>(kd[1]) * 9;
    const std::size_t h = input.height();
    const std::size_t w = input.width();

    ImageTensor out(out_ch, h, w);

    const std::size_t rows_per_band =
        std::clamp<std::size_t>(detail::kIm2colBudget / (depth * w), 1, h);
    std::vector<float> col(depth * rows_per_band * w);

    const Eigen::Map<const detail::RowMajorMatrixF> weights(kernels.data().data(),
                                                            static_cast<Eigen::Index>(out_ch),
                                                            static_cast<Eigen::Index>(depth));

    for (std::size_t y0 = 0; y0 < h; y0 += rows_per_band) {
        const std::size_t y1 = std::min(h, y0 + rows_per_band);
        const std::size_t band = (y1 - y0) * w;
        detail::im2col_3x3(input, y0, y1, col);

        const Eigen::Map<const detail::RowMajorMatrixF> patches(
            col.data(), static_cast<Eigen::Index>(depth), static_cast<Eigen::Index>(band));
        Eigen::Map<detail::RowMajorMatrixF, 0, Eigen::OuterStride<>> dst(
            out.data().data() + y0 * w, static_cast<Eigen::Index>(out_ch),
            static_cast<Eigen::Index>(band), Eigen::OuterStride<>(static_cast<Eigen::Index>(h * w)));
        dst.noalias() = weights * patches;
        for (std::size_t o = 0; o < out_ch; ++o)
            dst.row(static_cast<Eigen::Index>(o)).array() += bias[o];
    }
    return out;
}

inline void relu_inplace(ImageTensor& t) noexcept {
    for (float& v : t.data())
        v = std::max(v, 0.0f);
}

inline ImageTensor relu(ImageTensor t) {
    relu_inplace(t);
    return t;
}

/// 2x2 max pooling with stride 2.
inline ImageTensor maxpool2(const ImageTensor& input) {
    if (input.height() % 2 != 0 || input.width() % 2 != 0)
        throw DimensionError("maxpool2 needs even height and width, got " +
                             input.shape_string());
    const std::size_t oh = input.height() / 2;
    const std::size_t ow = input.width() / 2;
    ImageTensor out(input.channels(), oh, ow);
    for (std::size_t c = 0; c < input.channels(); ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                const float a = input.at(c, 2 * y, 2 * x);
                const float b = input.at(c, 2 * y, 2 * x + 1);
                const float d = input.at(c, 2 * y + 1, 2 * x);
                const float e = input.at(c, 2 * y + 1, 2 * x + 1);
                out.at(c, y, x) = std::max(std::max(a, b), std::max(d, e));
            }
        }
    }
    return out;
}

} // namespace deepwsd
