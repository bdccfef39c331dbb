#include "stereo/backends/models.hpp"

#include <array>
#include <cctype>
#include <utility>

#include "stereo/error.hpp"
#include "stereo/taxonomy.hpp"

namespace stereo {

namespace {

struct KnownModel {
    std::string_view id;
    std::array<std::string_view, 6> aliases;
};

constexpr std::array<KnownModel, 8> kRegistry = {{
    {"SD-1.5", {"sd", "sd1.5", "sd 1.5", "stable diffusion", "stable diffusion v1.5", "sd v1.5"}},
    {"SD-2.1", {"sd2.1", "sd 2.1", "stable diffusion v2.1", "sd v2.1", "", ""}},
    {"SD-XL", {"sdxl", "sd xl", "stable diffusion xl", "sdxl 1.0", "sd xl 1.0", ""}},
    {"ChilloutMix", {"chilloutmix", "chillout mix", "chillout", "", "", ""}},
    {"Dreamshaper", {"dreamshaper", "dream shaper", "", "", "", ""}},
    {"Realistic Vision", {"realistic vision", "realisticvision", "", "", "", ""}},
    {"SDVN3", {"sdvn3", "sdvn", "sdvn realart", "sdvn3 realart", "sdvn realart v3", ""}},
    {"Midjourney", {"midjourney", "midjurney", "mid journey", "mj", "", ""}},
}};

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<std::string> known_models() {
    std::vector<std::string> out;
    for (const auto& m : kRegistry) out.emplace_back(m.id);
    return out;
}

std::string canonical_model_id(std::string_view name) {
    auto token = normalize_token(name);
    constexpr std::string_view suffix = " model";
    if (token.size() > suffix.size() && token.ends_with(suffix)) token.resize(token.size() - suffix.size());
    for (const auto& m : kRegistry) {
        if (token == normalize_token(m.id)) return std::string(m.id);
        for (auto alias : m.aliases) {
            if (!alias.empty() && token == normalize_token(alias)) return std::string(m.id);
        }
    }
    return trim(name);
}

GenerationTarget parse_target(std::string_view text) {
    GenerationTarget target;
    std::size_t start = 0;
    bool first = true;
    while (start <= text.size()) {
        const auto plus = text.find('+', start);
        const auto part = trim(text.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start));
        if (first) {
            if (part.empty()) throw Error(ErrorCode::InvalidValue, "generation target has no base model");
            target.id = canonical_model_id(part);
            first = false;
        } else if (!part.empty()) {
            LoraPlugin lora;
            const auto colon = part.rfind(':');
            lora.name = trim(part.substr(0, colon));
            if (colon != std::string::npos) {
                try {
                    lora.weight = std::stod(part.substr(colon + 1));
                } catch (const std::exception&) {
                    throw Error(ErrorCode::InvalidValue, "bad LoRA weight in '" + part + "'");
                }
            }
            target.loras.push_back(std::move(lora));
        }
        if (plus == std::string_view::npos) break;
        start = plus + 1;
    }
    return target;
}

}  // namespace stereo
