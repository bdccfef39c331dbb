#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereo/backends/chat.hpp"
#include "stereo/backends/image.hpp"
#include "stereo/backends/models.hpp"
#include "stereo/domain.hpp"

namespace stereo {

// ---------------------------------------------------------------------------
// Intent extraction

struct GoldenIntent {
    std::string query;
    DetectionIntent expected;
};

/// JSONL rows {"query": ..., "expected": {intent}}. Throws IoError or
/// MalformedFile.
std::vector<GoldenIntent> load_golden_intents(const std::filesystem::path& path);

/// Same model, dimension and requested subgroup, and open text present on
/// both sides or on neither.
bool intent_matches(const DetectionIntent& expected, const DetectionIntent& got);

struct IntentMismatch {
    std::size_t index = 0;
    std::string query;
    DetectionIntent expected;
    std::optional<DetectionIntent> got;
    std::string error;
};

struct IntentAccuracy {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::vector<IntentMismatch> failures;

    double fraction() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

/// Calls intention_understand once per golden query, in order. Extraction
/// errors count as mismatches. Throws PreconditionViolated when `golden`
/// is empty.
IntentAccuracy intent_accuracy(std::span<const GoldenIntent> golden, ChatProvider& provider,
                               std::string_view default_model = kDefaultTarget, std::size_t retries = 2);

Json to_json(const IntentAccuracy& acc);

// ---------------------------------------------------------------------------
// Classifier comparison

/// `per_subgroup` synthetic images per subgroup of `dimension`, each
/// signed with its true label.
std::vector<ImageRecord> signed_test_set(SocialDimension dimension, std::size_t per_subgroup, std::uint64_t seed);

struct ClassifierAccuracy {
    SocialDimension dimension = SocialDimension::Gender;
    std::vector<Subgroup> subgroups;
    std::vector<std::size_t> support;
    std::vector<double> accuracy_a;
    std::vector<double> accuracy_b;
    double mean_a = 0.0;
    double mean_b = 0.0;

    /// mean_b - mean_a
    double mean_gap() const noexcept { return mean_b - mean_a; }
};

/// Per-subgroup accuracy of both backends against the signed truth. Images
/// whose signature lies outside `dimension` are ignored. Throws
/// MissingSubgroupCoverage when a subgroup has no test image.
ClassifierAccuracy classifier_accuracy(ClassifierBackend& a, ClassifierBackend& b, std::span<const ImageRecord> test_set,
                                       SocialDimension dimension);

Json to_json(const ClassifierAccuracy& acc);
std::string render_table(const ClassifierAccuracy& acc, std::string_view name_a = "A", std::string_view name_b = "B");

}  // namespace stereo
