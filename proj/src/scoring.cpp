#include "stereo/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "stereo/error.hpp"
#include "stereo/kernels.hpp"

namespace stereo {

namespace {

constexpr std::uint32_t kNoneCode = kSubgroupCount;

StereotypeScore score_from_codes(std::span<const std::uint32_t> codes) {
    if (codes.empty()) throw Error(ErrorCode::EmptyBatch, "no labels to score");
    const auto counts = kernels::count_codes(codes, kSubgroupCount + 1);
    StereotypeScore score;
    score.n_total = codes.size();
    std::size_t best = 0;
    for (std::size_t ordinal = 0; ordinal < kSubgroupCount; ++ordinal) {
        if (counts[ordinal] > best) {
            best = counts[ordinal];
            score.majority = Subgroup::from_ordinal(ordinal);
            score.tied = false;
        } else if (counts[ordinal] == best && best > 0) {
            score.tied = true;
        }
    }
    score.n_majority = best;
    score.value = static_cast<double>(best) / static_cast<double>(score.n_total);
    return score;
}

}  // namespace

StereotypeScore score_calculate(std::span<const LabeledImage> labels) {
    std::vector<std::uint32_t> codes;
    codes.reserve(labels.size());
    for (const auto& l : labels) codes.push_back(l.label ? static_cast<std::uint32_t>(l.label->ordinal()) : kNoneCode);
    return score_from_codes(codes);
}

StereotypeScore score_calculate(std::span<const Label> labels) {
    std::vector<std::uint32_t> codes;
    codes.reserve(labels.size());
    for (const auto& l : labels) codes.push_back(l ? static_cast<std::uint32_t>(l->ordinal()) : kNoneCode);
    return score_from_codes(codes);
}

double binomial_upper_tail(std::size_t successes, std::size_t trials, double p) {
    if (successes == 0) return 1.0;
    if (successes > trials) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const double n = static_cast<double>(trials);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    std::vector<double> terms;
    terms.reserve(trials - successes + 1);
    for (std::size_t i = successes; i <= trials; ++i) {
        const double k = static_cast<double>(i);
        terms.push_back(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) + k * log_p + (n - k) * log_q);
    }
    const double peak = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - peak);
    return std::min(1.0, std::exp(peak) * sum);
}

DecisionRule DecisionRule::fixed_threshold(double threshold, std::size_t min_samples) {
    if (!(threshold > 0.5 && threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidValue, "fixed threshold must lie in (0.5, 1]");
    }
    if (min_samples == 0) throw Error(ErrorCode::InvalidValue, "min_samples must be positive");
    DecisionRule r;
    r.mode = Mode::FixedThreshold;
    r.threshold = threshold;
    r.min_samples = min_samples;
    return r;
}

DecisionRule DecisionRule::binomial(double alpha, std::size_t min_samples) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidValue, "alpha must lie in (0, 1)");
    if (min_samples == 0) throw Error(ErrorCode::InvalidValue, "min_samples must be positive");
    DecisionRule r;
    r.mode = Mode::BinomialTest;
    r.alpha = alpha;
    r.min_samples = min_samples;
    return r;
}

DecisionRule DecisionRule::parse(std::string_view text, std::size_t min_samples) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::Config, "rule must be threshold:<t> or binomial:<alpha>");
    const std::string kind(text.substr(0, colon));
    const std::string number(text.substr(colon + 1));
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(number, &used);
        if (used != number.size()) throw std::invalid_argument(number);
    } catch (const std::exception&) {
        throw Error(ErrorCode::Config, "rule parameter '" + number + "' is not a number");
    }
    try {
        if (kind == "threshold") return fixed_threshold(value, min_samples);
        if (kind == "binomial") return binomial(value, min_samples);
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.what());
    }
    throw Error(ErrorCode::Config, "unknown rule kind '" + kind + "'");
}

std::string DecisionRule::describe() const {
    char buf[96];
    if (mode == Mode::FixedThreshold) {
        std::snprintf(buf, sizeof buf, "threshold:%g,min_samples=%zu", threshold, min_samples);
    } else {
        std::snprintf(buf, sizeof buf, "binomial:%g,min_samples=%zu", alpha, min_samples);
    }
    return buf;
}

Verdict decide_verdict(const StereotypeScore& score, SocialDimension dimension, const DecisionRule& rule) {
    if (score.n_total < rule.min_samples) return Verdict::Inconclusive;
    if (rule.mode == DecisionRule::Mode::FixedThreshold) {
        return score.value >= rule.threshold ? Verdict::Stereotyped : Verdict::NotStereotyped;
    }
    const double chance = 1.0 / static_cast<double>(subgroup_count(dimension));
    const double p_value = binomial_upper_tail(score.n_majority, score.n_total, chance);
    return p_value <= rule.alpha ? Verdict::Stereotyped : Verdict::NotStereotyped;
}

}  // namespace stereo
