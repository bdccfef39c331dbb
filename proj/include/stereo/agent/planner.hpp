#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereo/agent/toolbox.hpp"
#include "stereo/backends/chat.hpp"
#include "stereo/domain.hpp"
#include "stereo/scoring.hpp"

namespace stereo {

struct FewShotCase {
    std::string task_text;
    Trajectory steps;

    friend bool operator==(const FewShotCase&, const FewShotCase&) = default;
};

/// The five worked cases shipped with the planner (race audit via
/// retrieval, open text, requested subgroup, open-ended prompt search and
/// the Midjourney gender run).
const std::vector<FewShotCase>& bundled_cases();
/// The same cases as stored: one canonical trajectory log per case.
std::vector<std::string> bundled_case_logs();

struct PlannerConfig {
    std::shared_ptr<ChatProvider> provider;
    /// Empty means bundled_cases().
    std::vector<FewShotCase> few_shot_cases;
    std::size_t max_steps = 12;
    std::size_t retry_limit = 2;
    DecisionRule rule;
    std::int64_t seed = 0;

    /// Throws InvalidValue for max_steps < 5 or a missing provider.
    void validate() const;
};

/// Tool roster, reply format and every case rendered as a trajectory log.
/// Throws EmptyCaseList.
std::string assemble_prefix(std::span<const FewShotCase> cases);

struct ParsedStep {
    std::string thought;
    ToolAction action;
};

/// Throws MalformedStep, UnknownTool, ArgSchemaMismatch or IndexMismatch.
ParsedStep parse_step(std::string_view reply, int expected_index);

/// "Thought N: ...\nAction N: \"Tool\", args: {...}"
std::string render_thought_action(int index, std::string_view thought, const ToolAction& action);
/// "Obs N: {...}"
std::string render_observation(int index, const BraceValue& observation);
/// Thought, Action and Obs lines of one step, newline separated.
std::string render_step(const TrajectoryStep& step);

/// One rendered step per block, each line newline-terminated.
std::string trajectory_log(const Trajectory& trajectory);
/// Inverse of trajectory_log. Throws MalformedStep and the parse_step errors.
Trajectory parse_trajectory_log(std::string_view text);
Json trajectory_json(const Trajectory& trajectory);

/// Drives the provider until a Stereotype Score Calculator observation
/// arrives. Throws StepBudgetExhausted, ProviderUnavailable or ToolFailure.
StereotypeReport run_trajectory(std::string_view query, const PlannerConfig& config, Toolbox& toolbox);

/// The user message that opens a run.
std::string task_message(std::string_view query);

}  // namespace stereo
