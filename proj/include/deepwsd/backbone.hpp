#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "deepwsd/errors.hpp"
#include "deepwsd/tensor.hpp"
#include "deepwsd/tensor_ops.hpp"
#include "deepwsd/weights.hpp"

namespace deepwsd {

inline constexpr std::size_t kStageCount = 6;

// Keep in sync with share/backbone_constants.json (checked by the unit tests).
inline constexpr std::array<float, 3> kChannelMean{0.485f, 0.456f, 0.406f};
inline constexpr std::array<float, 3> kChannelStd{0.229f, 0.224f, 0.225f};

/// Labels of the comparison levels. Stage 0 is the pixel domain; stages 1..5
/// tap the output of the last ReLU of each convolution block, before pooling.
inline constexpr std::array<std::string_view, kStageCount> kStageNames{
    "pixel", "relu1_2", "relu2_2", "relu3_3", "relu4_3", "relu5_3"};

inline constexpr std::array<std::size_t, kStageCount> kStageChannels{3, 64, 128, 256, 512, 512};

/// Spatial alignment the backbone needs (four 2x2 poolings before stage 5).
inline constexpr std::size_t kSpatialMultiple = 16;
inline constexpr std::size_t kMinSpatialSize = 32;

struct FeatureStack {
    /// stages[0] is the cropped input in 0..1 (not normalized); stages[1..5]
    /// are the backbone features computed from the normalized input.
    std::array<ImageTensor, kStageCount> stages;

    static constexpr const std::array<std::string_view, kStageCount>& stage_names() {
        return kStageNames;
    }
};

/// Center crop each spatial dimension down to a multiple of `multiple`.
inline ImageTensor center_crop_to_multiple(const ImageTensor& image, std::size_t multiple) {
    const std::size_t h = image.height() / multiple * multiple;
    const std::size_t w = image.width() / multiple * multiple;
    if (h == 0 || w == 0)
        throw DimensionError("image " + image.shape_string() + " is smaller than " +
                             std::to_string(multiple) + " pixels");
    if (h == image.height() && w == image.width())
        return image;
    const std::size_t top = (image.height() - h) / 2;
    const std::size_t left = (image.width() - w) / 2;
    ImageTensor out(image.channels(), h, w);
    for (std::size_t c = 0; c < image.channels(); ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                out.at(c, y, x) = image.at(c, y + top, x + left);
    return out;
}

inline ImageTensor normalize_rgb(const ImageTensor& image) {
    if (image.channels() != 3)
        throw DimensionError("normalization expects 3 channels, got " + image.shape_string());
    ImageTensor out = image;
    for (std::size_t c = 0; c < 3; ++c)
        for (float& v : out.plane(c))
            v = (v - kChannelMean[c]) / kChannelStd[c];
    return out;
}

/// Shape check for extract_features inputs after cropping.
inline void check_backbone_input(const ImageTensor& image) {
    if (image.channels() != 3)
        throw DimensionError("backbone input must have 3 channels, got " + image.shape_string());
    if (image.height() < kMinSpatialSize || image.width() < kMinSpatialSize)
        throw DimensionError("image " + image.shape_string() + " is below the minimum " +
                             std::to_string(kMinSpatialSize) + "x" +
                             std::to_string(kMinSpatialSize) + " after cropping to multiples of " +
                             std::to_string(kSpatialMultiple));
}

/// Runs the five VGG16 blocks on a 3 x H x W image with values in 0..1.
/// Inputs not aligned to 16 pixels are center-cropped first.
inline FeatureStack extract_features(const ImageTensor& image, const WeightArchive& weights) {
    if (image.channels() != 3)
        throw DimensionError("backbone input must have 3 channels, got " + image.shape_string());
    if (image.height() < kMinSpatialSize || image.width() < kMinSpatialSize)
        throw DimensionError("image " + image.shape_string() + " is below the minimum " +
                             std::to_string(kMinSpatialSize) + "x" +
                             std::to_string(kMinSpatialSize));
    weights.validate_backbone();

    FeatureStack stack;
    stack.stages[0] = center_crop_to_multiple(image, kSpatialMultiple);
    check_backbone_input(stack.stages[0]);

    ImageTensor x = normalize_rgb(stack.stages[0]);
    for (std::size_t b = 0; b < kVggBlocks.size(); ++b) {
        if (b > 0)
            x = maxpool2(stack.stages[b]);
        for (const auto& layer : kVggBlocks[b]) {
            if (layer.name.empty())
                continue;
            const std::string base(layer.name);
            x = conv2d(x, weights.at(base + ".weight"), weights.at(base + ".bias").data());
            relu_inplace(x);
        }
        stack.stages[b + 1] = std::move(x);
        x = ImageTensor();
    }
    return stack;
}

} // namespace deepwsd
