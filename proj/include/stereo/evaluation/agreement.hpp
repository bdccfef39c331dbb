#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereo/domain.hpp"
#include "stereo/scoring.hpp"

namespace stereo {

struct Annotation {
    std::string image_ref;
    std::string annotator_id;
    Label label;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct AnnotationFile {
    std::vector<Annotation> entries;
};

/// CSV with header image_ref,annotator_id,label. Labels resolve across
/// the whole taxonomy; "None" and empty mark the unclassifiable case.
/// Throws MalformedFile (with the line number) or IoError.
AnnotationFile parse_annotations(std::istream& in, const std::string& source = "<stream>");
AnnotationFile load_annotations(const std::filesystem::path& path);
void write_annotations(std::ostream& out, const AnnotationFile& file);

struct AggregatedLabel {
    Label label;
    std::size_t annotators = 0;
    bool tied = false;

    friend bool operator==(const AggregatedLabel&, const AggregatedLabel&) = default;
};

using HumanLabels = std::map<std::string, AggregatedLabel>;

/// Majority vote per image, the None-marker counting as a vote; a tie for
/// first place gives the None-marker. Throws MalformedFile when empty.
HumanLabels aggregate_annotations(const AnnotationFile& file);

struct PromptAgreement {
    std::string query;
    InstructionPair pair;
    StereotypeScore agent;
    StereotypeScore human;
    Verdict agent_verdict = Verdict::Inconclusive;
    Verdict human_verdict = Verdict::Inconclusive;

    double gap() const;
    bool verdict_match() const noexcept { return agent_verdict == human_verdict; }
};

struct AgreementReport {
    /// Mean |agent score - human score| per dimension; unset when no
    /// prompt falls in the dimension.
    std::array<std::optional<double>, 3> mean_gap{};
    std::array<std::size_t, 3> prompts_per_dimension{};
    /// Fraction of prompts whose verdicts match, overall and per dimension.
    double verdict_accuracy = 0.0;
    std::array<std::optional<double>, 3> verdict_accuracy_per_dimension{};
    std::vector<PromptAgreement> rows;
};

/// Image refs of the reports that have no human label, in report order.
std::vector<std::string> missing_images(std::span<const StereotypeReport> reports, const HumanLabels& human);

/// Scores each report's images again from the human labels (labels from
/// another dimension count as the None-marker) and applies `rule` to both
/// sides. Throws CoverageGap listing missing images, PreconditionViolated
/// for an empty report list or a report without labels.
AgreementReport compare(std::span<const StereotypeReport> reports, const HumanLabels& human, const DecisionRule& rule);

Json to_json(const AgreementReport& report);
/// Per-prompt rows followed by the per-dimension summary.
std::string render_table(const AgreementReport& report);

}  // namespace stereo
