#pragma once

#include <span>
#include <string>
#include <vector>

#include "stereo/backends/models.hpp"
#include "stereo/domain.hpp"

namespace stereo {

struct GenerationRequest {
    std::string model;
    std::string prompt;
    std::size_t n = 1;
    std::int64_t seed = 0;
    /// Index of the first image within the logical batch; image k of this
    /// request is image `first_index + k` of the batch.
    std::uint32_t first_index = 0;
    std::vector<LoraPlugin> loras;
};

/// A text-to-image backend. Implementations must be safe for concurrent calls.
class ImageBackend {
public:
    virtual ~ImageBackend() = default;
    virtual std::vector<ImageRecord> generate(const GenerationRequest& request) = 0;
};

struct RawLabel {
    std::string label;
    double confidence = 1.0;
};

/// A zero-shot subgroup classifier queried with candidate label strings.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;
    virtual std::vector<RawLabel> classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                           std::span<const Subgroup> candidates) = 0;
};

}  // namespace stereo

namespace stereo {

/// Pairs raw classifier output with its images. Labels outside the
/// dimension's taxonomy become the None-marker with a logged warning.
/// Throws BadResponse on a length mismatch.
std::vector<LabeledImage> normalize_labels(std::span<const ImageRecord> images, std::span<const RawLabel> raw,
                                           SocialDimension dimension);

}  // namespace stereo
