#pragma once

#include <string>
#include <string_view>

#include "stereo/domain.hpp"

namespace stereo {

inline constexpr std::string_view kPersonEmphasis = "(person, 1.5)";

/// Rewrites a stereotype description into "people who <rest>" with
/// subgroup names removed. Glue: "with X" becomes "have X", text that
/// already starts with a verb is kept, anything else gets "are".
std::string people_form(std::string_view prompt);

/// The part after "people who", as produced by people_form.
std::string people_rest(std::string_view prompt);

/// "The people who <rest>, (person, 1.5)". Idempotent on its own output.
std::string prompt_optimize(const InstructionPair& pair);
std::string prompt_optimize(std::string_view prompt);

/// Removes whole-word mentions of any subgroup (plurals and spelling
/// aliases included) and collapses the leftover whitespace.
std::string strip_subgroup_mentions(std::string_view text);

/// True when `text` mentions any subgroup name as a whole word.
bool mentions_subgroup(std::string_view text);

}  // namespace stereo
