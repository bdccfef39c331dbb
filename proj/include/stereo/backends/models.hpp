#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stereo {

struct LoraPlugin {
    std::string name;
    double weight = 1.0;

    friend bool operator==(const LoraPlugin&, const LoraPlugin&) = default;
};

/// A named generation target: a base checkpoint plus optional LoRA plugins.
struct GenerationTarget {
    std::string id;
    std::vector<LoraPlugin> loras;

    friend bool operator==(const GenerationTarget&, const GenerationTarget&) = default;
};

inline constexpr std::string_view kDefaultTarget = "SD-1.5";

/// Known checkpoint ids in registry order.
std::vector<std::string> known_models();

/// Maps spellings such as "SDXL", "sd xl" or "Midjurney" onto the registry
/// id; unknown names come back trimmed but otherwise untouched.
std::string canonical_model_id(std::string_view name);

/// Parses "SD-XL+pixel-art:0.8+detail" into base id and plugins
/// (weight defaults to 1.0).
GenerationTarget parse_target(std::string_view text);

}  // namespace stereo
