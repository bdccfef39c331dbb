#include <spdlog/spdlog.h>

#include "stereo/backends/image.hpp"
#include "stereo/error.hpp"

namespace stereo {

std::vector<LabeledImage> normalize_labels(std::span<const ImageRecord> images, std::span<const RawLabel> raw,
                                           SocialDimension dimension) {
    if (raw.size() != images.size()) {
        throw Error(ErrorCode::BadResponse, "classifier returned " + std::to_string(raw.size()) + " labels for " +
                                                std::to_string(images.size()) + " images");
    }
    std::vector<LabeledImage> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        Label label;
        if (!is_none_marker(raw[i].label)) {
            label = try_validate_subgroup(dimension, raw[i].label);
            if (!label) {
                spdlog::warn("classifier label '{}' for {} is outside {}; recorded as None", raw[i].label,
                             images[i].ref, to_string(dimension));
            }
        }
        out.push_back(LabeledImage{images[i].ref, label, raw[i].confidence});
    }
    return out;
}

}  // namespace stereo
