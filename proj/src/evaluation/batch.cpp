#include "stereo/evaluation/batch.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

#include "stereo/error.hpp"
#include "stereo/rng.hpp"

namespace stereo {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
}

std::string stem_for(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "query_%03zu", index + 1);
    return buf;
}

}  // namespace

std::int64_t query_seed(std::int64_t base, std::size_t index) {
    // Kept below 2^53 so it survives a JSON round trip through doubles.
    return static_cast<std::int64_t>(combine_seed(static_cast<std::uint64_t>(base), index) >> 11);
}

std::vector<TaskOutcome> run_task_batch(std::span<const std::string> queries, const PlannerConfig& config,
                                        Toolbox& toolbox, const BatchOptions& options) {
    if (queries.empty()) throw Error(ErrorCode::PreconditionViolated, "query batch is empty");
    config.validate();

    std::vector<TaskOutcome> outcomes(queries.size());
    const int threads = static_cast<int>(std::clamp<std::size_t>(options.concurrency, 1, 64));

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t i = 0; i < queries.size(); ++i) {
        auto& o = outcomes[i];
        o.index = i;
        o.query = queries[i];
        o.seed = query_seed(config.seed, i);
        auto local = config;
        local.seed = o.seed;
        try {
            o.report = run_trajectory(o.query, local, toolbox);
        } catch (const Error& e) {
            o.error = e.code();
            o.cause = e.cause();
            o.message = e.what();
        } catch (const std::exception& e) {
            o.error = ErrorCode::ToolFailure;
            o.message = e.what();
        }
    }

    std::size_t failed = 0;
    for (const auto& o : outcomes) {
        if (o.ok()) continue;
        ++failed;
        spdlog::warn("query {} failed: {}", o.index + 1, o.message);
    }
    spdlog::info("batch finished: {} of {} queries produced a report", outcomes.size() - failed, outcomes.size());

    if (!options.out_dir.empty()) {
        const auto dir = options.out_dir / "reports";
        std::filesystem::create_directories(dir);
        Json summary = Json::array();
        for (const auto& o : outcomes) {
            const auto stem = stem_for(o.index);
            if (o.report) {
                write_file(dir / (stem + ".json"), to_json(*o.report).dump(2) + "\n");
                write_file(dir / (stem + ".trajectory.log"), trajectory_log(o.report->trajectory));
            }
            summary.push_back(to_json(o));
        }
        write_file(options.out_dir / "batch.json", summary.dump(2) + "\n");
    }
    return outcomes;
}

Json to_json(const TaskOutcome& o) {
    Json j;
    j["index"] = o.index;
    j["query"] = o.query;
    j["seed"] = o.seed;
    if (o.report) {
        j["status"] = "ok";
        j["verdict"] = to_string(o.report->verdict);
        j["score"] = o.report->score.value;
    } else {
        j["status"] = "error";
        j["error"] = o.error ? std::string(to_string(*o.error)) : std::string("unknown");
        if (o.cause) j["cause"] = std::string(to_string(*o.cause));
        j["message"] = o.message;
    }
    return j;
}

std::vector<StereotypeReport> successful_reports(std::span<const TaskOutcome> outcomes) {
    std::vector<StereotypeReport> out;
    for (const auto& o : outcomes) {
        if (o.report) out.push_back(*o.report);
    }
    return out;
}

}  // namespace stereo
