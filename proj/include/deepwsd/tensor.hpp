#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepwsd/errors.hpp"

namespace deepwsd {

/// Dense row-major tensor of 32-bit reals with arbitrary rank. Used for
/// weights and as the on-disk exchange type.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::uint32_t> dims)
        : dims_(std::move(dims)), data_(element_count(dims_), 0.0f) {}

    Tensor(std::vector<std::uint32_t> dims, std::vector<float> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (data_.size() != element_count(dims_))
            throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                                 " does not match its dims (" +
                                 std::to_string(element_count(dims_)) + ")");
    }

    const std::vector<std::uint32_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    friend bool operator==(const Tensor&, const Tensor&) = default;

    static std::size_t element_count(const std::vector<std::uint32_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                               [](std::size_t a, std::uint32_t d) { return a * d; });
    }

private:
    std::vector<std::uint32_t> dims_;
    std::vector<float> data_;
};

/// Rank-3 (channels x height x width) tensor holding raw pixels or a
/// feature map, stored channel-major.
class ImageTensor {
public:
    ImageTensor() = default;

    ImageTensor(std::size_t channels, std::size_t height, std::size_t width)
        : channels_(channels), height_(height), width_(width),
          data_(checked_count(channels, height, width), 0.0f) {}

    ImageTensor(std::size_t channels, std::size_t height, std::size_t width,
                std::vector<float> data)
        : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
        if (data_.size() != checked_count(channels, height, width))
            throw DimensionError("image tensor data length " + std::to_string(data_.size()) +
                                 " does not match " + shape_string(channels, height, width));
    }

    std::size_t channels() const noexcept { return channels_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return height_ * width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    std::span<float> plane(std::size_t c) noexcept {
        return std::span<float>(data_).subspan(c * plane_size(), plane_size());
    }
    std::span<const float> plane(std::size_t c) const noexcept {
        return std::span<const float>(data_).subspan(c * plane_size(), plane_size());
    }

    float& at(std::size_t c, std::size_t y, std::size_t x) noexcept {
        return data_[(c * height_ + y) * width_ + x];
    }
    float at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
        return data_[(c * height_ + y) * width_ + x];
    }

    bool same_shape(const ImageTensor& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ &&
               width_ == other.width_;
    }

    std::string shape_string() const { return shape_string(channels_, height_, width_); }

    friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

    static std::string shape_string(std::size_t c, std::size_t h, std::size_t w) {
        return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }

private:
    static std::size_t checked_count(std::size_t c, std::size_t h, std::size_t w) {
        if (c == 0 || h == 0 || w == 0)
            throw DimensionError("image tensor dims must be positive, got " +
                                 shape_string(c, h, w));
        return c * h * w;
    }

    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<float> data_;
};

inline bool all_finite(std::span<const float> values) noexcept {
    return std::all_of(values.begin(), values.end(),
                       [](float v) { return std::isfinite(v); });
}

/// Views a rank-3 tensor, or a rank-4 tensor with a leading batch of 1, as an image.
inline ImageTensor to_image(const Tensor& t) {
    const auto& d = t.dims();
    std::vector<float> values(t.data().begin(), t.data().end());
    if (d.size() == 3)
        return ImageTensor(d[0], d[1], d[2], std::move(values));
    if (d.size() == 4 && d[0] == 1)
        return ImageTensor(d[1], d[2], d[3], std::move(values));
    throw DimensionError("expected a CxHxW or 1xCxHxW tensor, got rank " +
                         std::to_string(d.size()));
}

inline Tensor to_tensor(const ImageTensor& img) {
    std::vector<float> values(img.data().begin(), img.data().end());
    return Tensor({static_cast<std::uint32_t>(img.channels()),
                   static_cast<std::uint32_t>(img.height()),
                   static_cast<std::uint32_t>(img.width())},
                  std::move(values));
}

} // namespace deepwsd
