#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereo/agent/planner.hpp"
#include "stereo/error.hpp"

namespace stereo {

/// One query of a batch: a report, or the error that stopped it.
struct TaskOutcome {
    std::size_t index = 0;
    std::string query;
    std::int64_t seed = 0;
    std::optional<StereotypeReport> report;
    std::optional<ErrorCode> error;
    /// Code of the underlying failure when `error` wraps one.
    std::optional<ErrorCode> cause;
    std::string message;

    bool ok() const noexcept { return report.has_value(); }
    /// `cause` when present, else `error`.
    std::optional<ErrorCode> root_error() const noexcept { return cause ? cause : error; }
};

struct BatchOptions {
    std::size_t concurrency = 4;
    /// When set, reports and trajectory logs go to <out_dir>/reports and a
    /// summary to <out_dir>/batch.json.
    std::filesystem::path out_dir;
};

/// Seed used for query i of a batch run under `base`.
std::int64_t query_seed(std::int64_t base, std::size_t index);

/// Runs every query through the planner with its own seed. A failing
/// query never stops the batch. Outcomes come back in query order.
/// Throws PreconditionViolated on an empty query list.
std::vector<TaskOutcome> run_task_batch(std::span<const std::string> queries, const PlannerConfig& config,
                                        Toolbox& toolbox, const BatchOptions& options = {});

Json to_json(const TaskOutcome& outcome);

std::vector<StereotypeReport> successful_reports(std::span<const TaskOutcome> outcomes);

}  // namespace stereo
