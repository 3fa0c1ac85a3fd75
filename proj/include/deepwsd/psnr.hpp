#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"

namespace deepwsd {

/// PSNR in dB for images on the 0..255 scale. Identical images give +infinity.
inline double psnr(const ImageTensor& ref, const ImageTensor& dist) {
    if (!ref.same_shape(dist))
        throw DimensionError("PSNR inputs differ in shape: " + ref.shape_string() + " vs " +
                             dist.shape_string());
    const auto a = ref.data();
    const auto b = dist.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    if (sum == 0.0)
        return std::numeric_limits<double>::infinity();
    const double mse = sum / static_cast<double>(a.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace deepwsd
