#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stereo {

enum class SocialDimension : std::uint8_t { Gender = 0, Race = 1, Religion = 2 };

inline constexpr std::array<SocialDimension, 3> kAllDimensions = {
    SocialDimension::Gender, SocialDimension::Race, SocialDimension::Religion};

/// A demographic category inside one dimension. Only the taxonomy can mint
/// these, so a Subgroup value is always valid.
class Subgroup {
public:
    SocialDimension dimension() const noexcept { return dimension_; }
    /// Position inside its dimension, in canonical order.
    std::size_t index() const noexcept { return index_; }
    /// Position across the whole taxonomy (Gender first, then Race, Religion).
    std::size_t ordinal() const noexcept;
    /// Canonical lowercase token, e.g. "middle eastern".
    std::string_view name() const noexcept;
    /// Title-cased form used in observations, e.g. "Middle Eastern".
    std::string display_name() const;

    static Subgroup from_ordinal(std::size_t ordinal);

    friend bool operator==(Subgroup a, Subgroup b) noexcept {
        return a.dimension_ == b.dimension_ && a.index_ == b.index_;
    }
    friend auto operator<=>(Subgroup a, Subgroup b) noexcept { return a.ordinal() <=> b.ordinal(); }

private:
    friend std::span<const Subgroup> subgroups_of(SocialDimension);
    constexpr Subgroup(SocialDimension dimension, std::uint8_t index) : dimension_(dimension), index_(index) {}

    SocialDimension dimension_;
    std::uint8_t index_;
};

/// A classified label: a subgroup, or nullopt for the unclassifiable marker.
using Label = std::optional<Subgroup>;

inline constexpr std::size_t kSubgroupCount = 13;

std::span<const Subgroup> subgroups_of(SocialDimension dimension);
std::vector<Subgroup> all_subgroups();
std::size_t subgroup_count(SocialDimension dimension);

std::string_view to_string(SocialDimension dimension);
/// Accepts the canonical names plus "sex", "ethnicity", "racial", "religious"
/// and similar wording. Throws UnknownDimension.
SocialDimension parse_dimension(std::string_view text);
std::optional<SocialDimension> try_parse_dimension(std::string_view text);

/// Case-folds, strips quotes/punctuation variants and resolves the alias
/// table. Throws UnknownSubgroup when nothing in `dimension` matches.
Subgroup validate_subgroup(SocialDimension dimension, std::string_view name);
std::optional<Subgroup> try_validate_subgroup(SocialDimension dimension, std::string_view name);

/// All subgroups (any dimension) whose canonical name matches `name`.
std::vector<Subgroup> match_subgroup_any(std::string_view name);

/// Resolves across every dimension; throws AmbiguousSubgroup when the name
/// matches in more than one dimension and UnknownSubgroup when in none.
Subgroup resolve_subgroup(std::string_view name);

/// True for the spellings used for the unclassifiable marker ("None", "none", "").
bool is_none_marker(std::string_view text);

/// "None" for the marker, display name otherwise.
std::string label_display(const Label& label);
/// "none" for the marker, canonical name otherwise.
std::string label_token(const Label& label);

/// The normalization applied before matching: lowercase, '-' and '_' to
/// space, whitespace collapsed, surrounding quotes stripped.
std::string normalize_token(std::string_view text);

/// Stable hex digest of the taxonomy (dimensions, subgroups, order).
std::string taxonomy_hash();

}  // namespace stereo
