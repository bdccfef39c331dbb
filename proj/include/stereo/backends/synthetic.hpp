#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stereo/backends/image.hpp"
#include "stereo/domain.hpp"

namespace stereo {

/// A probability distribution over subgroups plus the None-marker.
struct Distribution {
    std::vector<std::pair<Label, double>> outcomes;

    /// Throws InvalidValue unless probabilities are non-negative and sum to
    /// 1 within 1e-9.
    void validate() const;

    static Distribution point(Label label);
    /// `major` gets `p`, the rest of the dimension shares 1 - p evenly.
    static Distribution skewed(Subgroup major, double p);
    static Distribution uniform(SocialDimension dimension);
};

struct PatternRule {
    std::string pattern;  // case-insensitive substring of the prompt
    Distribution distribution;
};

/// Stand-in for a generation model: P(subgroup | prompt) by pattern.
struct SyntheticModelSpec {
    std::string model_id;
    std::vector<PatternRule> rules;
    std::optional<Distribution> fallback;
    std::uint64_t rng_seed = 0;

    /// Throws InvalidValue on a bad distribution.
    void validate() const;
    /// Longest matching pattern wins; throws NoDefaultDistribution when
    /// nothing matches and no fallback exists.
    const Distribution& match(std::string_view prompt) const;
};

/// Signature text embedded in synthetic images: "race/african" or "none".
std::string signature_of(const Label& label);
/// Inverse of signature_of; throws MissingSignature on garbage.
Label parse_signature(std::string_view signature);

/// Samples n images from the matched distribution. Image i uses draw
/// (rng_seed, seed, first_index + i). When `artifact_dir` is non-empty a
/// small PNG carrying the signature in a tEXt chunk is written per image.
std::vector<ImageRecord> synth_generate(const SyntheticModelSpec& spec, std::string_view prompt, std::size_t n,
                                        std::int64_t seed, std::uint32_t first_index = 0,
                                        const std::filesystem::path& artifact_dir = {});

/// Reads the signature from the record (or the image file's metadata) and
/// returns it with confidence 1.0; signatures outside `dimension` become
/// the None-marker. Throws MissingSignature.
std::vector<LabeledImage> oracle_classify(std::span<const ImageRecord> images, SocialDimension dimension);

/// Row-stochastic confusion matrix: true label -> predicted distribution.
struct ConfusionSpec {
    SocialDimension dimension = SocialDimension::Gender;
    std::vector<std::pair<Label, Distribution>> rows;

    void validate() const;
    const Distribution* row(const Label& truth) const;

    static ConfusionSpec identity(SocialDimension dimension);
    /// Each row keeps `diagonal` on the truth, `none_share` on the
    /// None-marker and spreads the rest evenly across the other subgroups.
    /// The None row keeps `diagonal` on the None-marker and spreads the
    /// rest over all subgroups.
    static ConfusionSpec uniform_diagonal(SocialDimension dimension, double diagonal, double none_share = 0.0);
};

/// Predicted label per image drawn from the confusion row of its signature,
/// deterministic per (seed, image seed, image index). Throws
/// MissingSignature or RowMissing.
std::vector<LabeledImage> noisy_classify(const ConfusionSpec& spec, std::span<const ImageRecord> images,
                                         std::uint64_t seed);

/// Image backend serving SyntheticModelSpecs. Specs come from `source`,
/// are built on first use per model id and are immutable afterwards.
class SyntheticImageBackend final : public ImageBackend {
public:
    using SpecSource = std::function<SyntheticModelSpec(const std::string& model_id)>;

    explicit SyntheticImageBackend(SpecSource source, std::filesystem::path artifact_dir = {});
    explicit SyntheticImageBackend(std::vector<SyntheticModelSpec> specs, std::filesystem::path artifact_dir = {});

    std::vector<ImageRecord> generate(const GenerationRequest& request) override;
    const SyntheticModelSpec& spec_for(const std::string& model_id);

private:
    SpecSource source_;
    std::filesystem::path artifact_dir_;
    std::mutex mutex_;
    std::map<std::string, SyntheticModelSpec> cache_;
};

class OracleClassifier final : public ClassifierBackend {
public:
    std::vector<RawLabel> classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                   std::span<const Subgroup> candidates) override;
};

/// One ConfusionSpec per dimension; classifying under a dimension without
/// a spec throws RowMissing.
class NoisyClassifier final : public ClassifierBackend {
public:
    NoisyClassifier(std::vector<ConfusionSpec> specs, std::uint64_t seed);

    std::vector<RawLabel> classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                   std::span<const Subgroup> candidates) override;

    static NoisyClassifier uniform(double diagonal, double none_share, std::uint64_t seed);

private:
    std::vector<ConfusionSpec> specs_;
    std::uint64_t seed_;
};

}  // namespace stereo
