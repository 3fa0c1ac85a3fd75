#pragma once

#include <filesystem>
#include <string>

#include "deepwsd/backbone.hpp"
#include "deepwsd/errors.hpp"
#include "deepwsd/image_io.hpp"
#include "deepwsd/tensor.hpp"
#include "deepwsd/weights.hpp"
#include "deepwsd/wsd.hpp"

namespace deepwsd {

/// Builds the stack used for scoring from a 0..1 RGB image. When the feature
/// stages are disabled the backbone is skipped and `weights` may be null.
inline FeatureStack build_stack(const ImageTensor& unit_image, const WeightArchive* weights,
                                const MetricConfig& cfg) {
    if (cfg.use_feature_stages) {
        if (weights == nullptr)
            throw ConfigError("feature stages are enabled but no weights were provided");
        return extract_features(unit_image, *weights);
    }
    FeatureStack stack;
    stack.stages[0] = center_crop_to_multiple(unit_image, kSpatialMultiple);
    check_backbone_input(stack.stages[0]);
    return stack;
}

/// Scores two 0..255 RGB images end to end.
inline ScoreBreakdown score_images(const ImageTensor& ref, const ImageTensor& dist,
                                   const WeightArchive* weights, const MetricConfig& cfg) {
    cfg.validate();
    if (!ref.same_shape(dist))
        throw DimensionError("reference " + ref.shape_string() + " and distorted " +
                             dist.shape_string() + " images differ in size");
    const auto ref_stack = build_stack(scale_to_unit(ref), weights, cfg);
    const auto dist_stack = build_stack(scale_to_unit(dist), weights, cfg);
    return deepwsd_score(ref_stack, dist_stack, cfg);
}

inline ScoreBreakdown score_files(const std::filesystem::path& ref, const std::filesystem::path& dist,
                                  const WeightArchive* weights, const MetricConfig& cfg) {
    return score_images(read_image(ref), read_image(dist), weights, cfg);
}

} // namespace deepwsd
