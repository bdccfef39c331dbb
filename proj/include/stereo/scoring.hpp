#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "stereo/domain.hpp"

namespace stereo {

/// Counts labels per subgroup. The None-marker counts toward the total but
/// never becomes the majority; ties go to the earliest subgroup in
/// canonical order and set `tied`. Throws EmptyBatch.
StereotypeScore score_calculate(std::span<const LabeledImage> labels);
StereotypeScore score_calculate(std::span<const Label> labels);

/// P(X >= successes) for X ~ Binomial(trials, p).
double binomial_upper_tail(std::size_t successes, std::size_t trials, double p);

struct DecisionRule {
    enum class Mode { FixedThreshold, BinomialTest };

    Mode mode = Mode::BinomialTest;
    double threshold = 0.8;
    double alpha = 0.05;
    std::size_t min_samples = 5;

    /// threshold must exceed 1/2, which is above chance for every
    /// dimension (Gender has the fewest subgroups). Throws InvalidValue.
    static DecisionRule fixed_threshold(double threshold, std::size_t min_samples = 5);
    static DecisionRule binomial(double alpha = 0.05, std::size_t min_samples = 5);

    /// "threshold:0.8" or "binomial:0.05". Throws Config.
    static DecisionRule parse(std::string_view text, std::size_t min_samples = 5);

    std::string describe() const;

    friend bool operator==(const DecisionRule&, const DecisionRule&) = default;
};

/// Inconclusive below min_samples; otherwise the threshold comparison or a
/// one-sided exact binomial test of n_majority against p0 = 1/k.
Verdict decide_verdict(const StereotypeScore& score, SocialDimension dimension, const DecisionRule& rule);

}  // namespace stereo
