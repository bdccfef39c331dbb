#include "stereo/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <utility>

#include "stereo/error.hpp"

namespace stereo {

namespace {

constexpr std::array<std::string_view, 2> kGenderNames = {"male", "female"};
constexpr std::array<std::string_view, 5> kRaceNames = {"african", "european", "asian", "latino",
                                                        "middle eastern"};
constexpr std::array<std::string_view, 6> kReligionNames = {"christian", "muslim", "buddhist",
                                                            "hindu",     "catholic", "jew"};

std::span<const std::string_view> names_of(SocialDimension dimension) {
    switch (dimension) {
        case SocialDimension::Gender: return kGenderNames;
        case SocialDimension::Race: return kRaceNames;
        case SocialDimension::Religion: return kReligionNames;
    }
    return {};
}

std::size_t offset_of(SocialDimension dimension) {
    switch (dimension) {
        case SocialDimension::Gender: return 0;
        case SocialDimension::Race: return kGenderNames.size();
        case SocialDimension::Religion: return kGenderNames.size() + kRaceNames.size();
    }
    return 0;
}

// Spellings seen in model output that do not reduce to a canonical name
// through normalize_token alone.
constexpr std::array<std::pair<std::string_view, std::string_view>, 4> kAliases = {{
    {"afrcian", "african"},
    {"middleeastern", "middle eastern"},
    {"jewish", "jew"},
    {"mid eastern", "middle eastern"},
}};

std::string_view resolve_alias(std::string_view token) {
    for (const auto& [alias, canonical] : kAliases) {
        if (alias == token) return canonical;
    }
    return token;
}

}  // namespace

std::span<const Subgroup> subgroups_of(SocialDimension dimension) {
    static const std::array<Subgroup, 2> gender = {Subgroup(SocialDimension::Gender, 0),
                                                   Subgroup(SocialDimension::Gender, 1)};
    static const std::array<Subgroup, 5> race = {
        Subgroup(SocialDimension::Race, 0), Subgroup(SocialDimension::Race, 1),
        Subgroup(SocialDimension::Race, 2), Subgroup(SocialDimension::Race, 3),
        Subgroup(SocialDimension::Race, 4)};
    static const std::array<Subgroup, 6> religion = {
        Subgroup(SocialDimension::Religion, 0), Subgroup(SocialDimension::Religion, 1),
        Subgroup(SocialDimension::Religion, 2), Subgroup(SocialDimension::Religion, 3),
        Subgroup(SocialDimension::Religion, 4), Subgroup(SocialDimension::Religion, 5)};
    switch (dimension) {
        case SocialDimension::Gender: return gender;
        case SocialDimension::Race: return race;
        case SocialDimension::Religion: return religion;
    }
    return {};
}

std::vector<Subgroup> all_subgroups() {
    std::vector<Subgroup> out;
    out.reserve(kSubgroupCount);
    for (auto dimension : kAllDimensions) {
        auto group = subgroups_of(dimension);
        out.insert(out.end(), group.begin(), group.end());
    }
    return out;
}

std::size_t subgroup_count(SocialDimension dimension) { return names_of(dimension).size(); }

std::size_t Subgroup::ordinal() const noexcept { return offset_of(dimension_) + index_; }

std::string_view Subgroup::name() const noexcept { return names_of(dimension_)[index_]; }

std::string Subgroup::display_name() const {
    std::string out(name());
    bool start = true;
    for (auto& c : out) {
        if (start && std::isalpha(static_cast<unsigned char>(c))) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        start = (c == ' ');
    }
    return out;
}

Subgroup Subgroup::from_ordinal(std::size_t ordinal) {
    for (auto dimension : kAllDimensions) {
        auto group = subgroups_of(dimension);
        if (ordinal < group.size()) return group[ordinal];
        ordinal -= group.size();
    }
    throw Error(ErrorCode::InvalidValue, "subgroup ordinal out of range");
}

std::string_view to_string(SocialDimension dimension) {
    switch (dimension) {
        case SocialDimension::Gender: return "Gender";
        case SocialDimension::Race: return "Race";
        case SocialDimension::Religion: return "Religion";
    }
    return "?";
}

std::string normalize_token(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if (raw == '\'' || raw == '"' || raw == '`' || raw == '.' || raw == ',' || raw == ';') continue;
        if (raw == '-' || raw == '_' || std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::optional<SocialDimension> try_parse_dimension(std::string_view text) {
    const auto token = normalize_token(text);
    static constexpr std::array<std::pair<std::string_view, SocialDimension>, 14> table = {{
        {"gender", SocialDimension::Gender},
        {"sex", SocialDimension::Gender},
        {"gender/sexuality", SocialDimension::Gender},
        {"gender/sex", SocialDimension::Gender},
        {"gendered", SocialDimension::Gender},
        {"race", SocialDimension::Race},
        {"racial", SocialDimension::Race},
        {"ethnicity", SocialDimension::Race},
        {"race/ethnicity", SocialDimension::Race},
        {"ethnic", SocialDimension::Race},
        {"religion", SocialDimension::Religion},
        {"religious", SocialDimension::Religion},
        {"religions", SocialDimension::Religion},
        {"faith", SocialDimension::Religion},
    }};
    for (const auto& [name, dimension] : table) {
        if (token == name) return dimension;
    }
    return std::nullopt;
}

SocialDimension parse_dimension(std::string_view text) {
    if (auto d = try_parse_dimension(text)) return *d;
    throw Error(ErrorCode::UnknownDimension, "unknown social dimension '" + std::string(text) + "'");
}

std::optional<Subgroup> try_validate_subgroup(SocialDimension dimension, std::string_view name) {
    const auto token = resolve_alias(normalize_token(name));
    auto names = names_of(dimension);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == token) return subgroups_of(dimension)[i];
    }
    return std::nullopt;
}

Subgroup validate_subgroup(SocialDimension dimension, std::string_view name) {
    if (auto g = try_validate_subgroup(dimension, name)) return *g;
    throw Error(ErrorCode::UnknownSubgroup, "'" + std::string(name) + "' is not a " +
                                                std::string(to_string(dimension)) + " subgroup");
}

std::vector<Subgroup> match_subgroup_any(std::string_view name) {
    std::vector<Subgroup> out;
    for (auto dimension : kAllDimensions) {
        if (auto g = try_validate_subgroup(dimension, name)) out.push_back(*g);
    }
    return out;
}

Subgroup resolve_subgroup(std::string_view name) {
    auto matches = match_subgroup_any(name);
    if (matches.empty()) {
        throw Error(ErrorCode::UnknownSubgroup, "'" + std::string(name) + "' is not in the taxonomy");
    }
    if (matches.size() > 1) {
        throw Error(ErrorCode::AmbiguousSubgroup,
                    "'" + std::string(name) + "' matches subgroups in several dimensions");
    }
    return matches.front();
}

bool is_none_marker(std::string_view text) {
    const auto token = normalize_token(text);
    return token.empty() || token == "none" || token == "null" || token == "n/a";
}

std::string label_display(const Label& label) { return label ? label->display_name() : "None"; }

std::string label_token(const Label& label) { return label ? std::string(label->name()) : "none"; }

std::string taxonomy_hash() {
    // FNV-1a over "Dimension:name,name;..." in canonical order.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (auto dimension : kAllDimensions) {
        mix(to_string(dimension));
        mix(":");
        for (auto name : names_of(dimension)) {
            mix(name);
            mix(",");
        }
        mix(";");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace stereo
