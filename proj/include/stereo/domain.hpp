#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stereo/brace.hpp"
#include "stereo/taxonomy.hpp"

namespace stereo {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Instruction pairs

inline constexpr std::string_view kUserTextSource = "user-text";

/// A (prompt, subgroup) stereotype hypothesis: the unit of audit.
struct InstructionPair {
    std::string prompt;
    Subgroup subgroup;
    std::string source{kUserTextSource};

    SocialDimension dimension() const noexcept { return subgroup.dimension(); }

    friend bool operator==(const InstructionPair&, const InstructionPair&) = default;
};

/// Throws InvalidValue on an empty prompt.
InstructionPair make_pair(std::string prompt, Subgroup subgroup, std::string source = std::string(kUserTextSource));

/// Canonical form: {"prompt","subgroup","dimension","source"} in that order.
Json to_json(const InstructionPair& pair);
InstructionPair pair_from_json(const Json& j);
std::string serialize(const InstructionPair& pair);

/// Pulls the first object carrying "prompt" and "subgroup" out of a chat
/// reply, tolerating surrounding prose and the unquoted-key style. Throws
/// NoPairFound, UnknownSubgroup or AmbiguousSubgroup.
InstructionPair parse_instruction_pair(std::string_view text);

// ---------------------------------------------------------------------------
// Intents

struct DetectionIntent {
    std::string model;
    std::optional<SocialDimension> dimension;
    std::optional<std::string> open_text;
    std::optional<Subgroup> requested_subgroup;

    friend bool operator==(const DetectionIntent&, const DetectionIntent&) = default;
};

/// Fills the dimension from the requested subgroup when missing; throws
/// InvalidValue when the model is empty or the two disagree.
DetectionIntent validated(DetectionIntent intent);

Json to_json(const DetectionIntent& intent);
DetectionIntent intent_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Tool actions and trajectories

enum class ToolKind {
    IntentionUnderstanding,
    InstructionRetrieval,
    InstructionGeneration,
    ImageGeneration,
    SubgroupDetection,
    StereotypeScoreCalculator,
};

inline constexpr std::array<ToolKind, 6> kAllTools = {
    ToolKind::IntentionUnderstanding, ToolKind::InstructionRetrieval, ToolKind::InstructionGeneration,
    ToolKind::ImageGeneration,        ToolKind::SubgroupDetection,    ToolKind::StereotypeScoreCalculator};

struct ToolSchema {
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

std::string_view display_name(ToolKind tool);
std::string_view enum_name(ToolKind tool);
const ToolSchema& schema_of(ToolKind tool);
/// Accepts display names case-insensitively plus a few aliases
/// ("Subgroup Detection", "BLIP detection"). Throws UnknownTool.
ToolKind parse_tool(std::string_view name);

struct ToolAction {
    ToolKind tool;
    /// Object whose keys are exactly the tool's schema keys.
    BraceValue args = BraceValue::object();

    friend bool operator==(const ToolAction&, const ToolAction&) = default;
};

/// Lower-cases keys, maps known key aliases ("task" -> "task description",
/// "instrution_pair" -> "instruction_pair") and checks them against the
/// schema. Throws ArgSchemaMismatch.
ToolAction make_action(ToolKind tool, BraceValue args);

struct TrajectoryStep {
    int index = 1;
    std::string thought;
    ToolAction action;
    BraceValue observation = BraceValue::object();

    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

using Trajectory = std::vector<TrajectoryStep>;

Json to_json(const TrajectoryStep& step);

// ---------------------------------------------------------------------------
// Images, labels, scores

struct ImageRecord {
    std::string ref;
    std::filesystem::path path;  // empty for in-memory synthetic images
    std::string model;
    std::string prompt;
    std::int64_t seed = 0;
    std::uint32_t index = 0;
    /// Mirrors the signature embedded in synthetic image metadata.
    std::optional<std::string> signature;

    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct LabeledImage {
    std::string image_ref;
    Label label;
    double confidence = 1.0;

    friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

struct StereotypeScore {
    double value = 0.0;
    Label majority;
    std::size_t n_total = 0;
    std::size_t n_majority = 0;
    bool tied = false;

    friend bool operator==(const StereotypeScore&, const StereotypeScore&) = default;
};

enum class Verdict { Stereotyped, NotStereotyped, Inconclusive };

std::string_view to_string(Verdict verdict);

struct StereotypeReport {
    std::string query;
    DetectionIntent intent;
    InstructionPair pair;
    std::string optimized_prompt;
    StereotypeScore score;
    Verdict verdict = Verdict::Inconclusive;
    std::string rule;
    Trajectory trajectory;
    std::vector<LabeledImage> labels;
};

Json to_json(const StereotypeScore& score);
StereotypeScore score_from_json(const Json& j);
Json to_json(const LabeledImage& image);
Json to_json(const StereotypeReport& report);
StereotypeReport report_from_json(const Json& j);

}  // namespace stereo
