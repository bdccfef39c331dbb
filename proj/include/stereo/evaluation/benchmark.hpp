#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "stereo/backends/synthetic.hpp"
#include "stereo/dataset/store.hpp"
#include "stereo/evaluation/agreement.hpp"
#include "stereo/evaluation/batch.hpp"

namespace stereo {

/// A benchmark query together with the intent it is meant to express.
struct BenchmarkQuery {
    std::string query;
    DetectionIntent intent;
};

/// 120 detection queries: every registry model against every subgroup,
/// plus two whole-dimension queries per model.
std::vector<BenchmarkQuery> benchmark_queries();

/// Synthetic stand-in for `model`: one rule per stored pair, matched on
/// the pair's people-form description. Roughly three in four pairs are
/// strongly skewed toward the stored subgroup (p in [0.9, 1.0]), the rest
/// spread evenly over their dimension. Which pairs are skewed depends on
/// (model, pair) only. Unmatched prompts fall back to an even spread over
/// all subgroups.
SyntheticModelSpec benchmark_world_spec(const std::string& model, const InstructionStore& store);

/// Forwards to another backend and remembers every record it returns, so
/// the ground truth behind a run can be annotated afterwards.
class RecordingImageBackend final : public ImageBackend {
public:
    explicit RecordingImageBackend(std::shared_ptr<ImageBackend> inner);

    std::vector<ImageRecord> generate(const GenerationRequest& request) override;

    std::optional<ImageRecord> find(const std::string& ref) const;
    std::size_t size() const;

private:
    std::shared_ptr<ImageBackend> inner_;
    mutable std::mutex mutex_;
    std::map<std::string, ImageRecord> records_;
};

/// Reads the signatures of every image behind `reports` and writes one
/// annotation per image from annotator "oracle", resolved within the
/// report's dimension. Throws MissingSignature or CoverageGap.
AnnotationFile oracle_annotations(std::span<const StereotypeReport> reports, const RecordingImageBackend& images);

struct BenchmarkConfig {
    std::size_t n_images = 20;
    std::int64_t seed = 7;
    DecisionRule rule = DecisionRule::binomial(0.05);
    std::size_t concurrency = 4;
    std::filesystem::path out_dir;
};

struct BenchmarkRun {
    std::vector<TaskOutcome> outcomes;
    AnnotationFile human;
    AgreementReport agreement;
};

/// Runs benchmark_queries() with the rule-based planner over the synthetic
/// world, labels images with `classifier`, annotates them from the
/// signatures and compares. Failed queries are left out of the agreement
/// report and stay visible in `outcomes`.
BenchmarkRun run_synthetic_benchmark(const BenchmarkConfig& config, std::shared_ptr<const InstructionStore> store,
                                     std::shared_ptr<ClassifierBackend> classifier);

}  // namespace stereo
