#include "stereo/backends/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "stereo/error.hpp"
#include "stereo/kernels.hpp"
#include "stereo/png_meta.hpp"
#include "stereo/rng.hpp"

namespace stereo {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr std::string_view kSignatureKey = "stereo:signature";
constexpr std::uint64_t kNoiseSalt = 0xc1a55f1e5ULL;

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string file_safe(std::string_view s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

std::string signature_from_record(const ImageRecord& image) {
    if (image.signature) return *image.signature;
    if (!image.path.empty()) {
        auto text = png::read_text(image.path);
        auto it = text.find(std::string(kSignatureKey));
        if (it != text.end()) return it->second;
    }
    throw Error(ErrorCode::MissingSignature, "image '" + image.ref + "' carries no synthetic signature");
}

}  // namespace

// ---------------------------------------------------------------------------
// Distributions

void Distribution::validate() const {
    if (outcomes.empty()) throw Error(ErrorCode::InvalidValue, "distribution has no outcomes");
    double sum = 0.0;
    for (const auto& [label, p] : outcomes) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidValue, "negative or non-finite probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw Error(ErrorCode::InvalidValue, "distribution sums to " + std::to_string(sum) + ", not 1");
    }
}

Distribution Distribution::point(Label label) { return Distribution{{{label, 1.0}}}; }

Distribution Distribution::skewed(Subgroup major, double p) {
    Distribution d;
    const auto group = subgroups_of(major.dimension());
    const double rest = (1.0 - p) / static_cast<double>(group.size() - 1);
    for (auto g : group) d.outcomes.emplace_back(g, g == major ? p : rest);
    return d;
}

Distribution Distribution::uniform(SocialDimension dimension) {
    Distribution d;
    const auto group = subgroups_of(dimension);
    for (auto g : group) d.outcomes.emplace_back(g, 1.0 / static_cast<double>(group.size()));
    return d;
}

void SyntheticModelSpec::validate() const {
    for (const auto& rule : rules) {
        if (rule.pattern.empty()) throw Error(ErrorCode::InvalidValue, "empty pattern in model " + model_id);
        rule.distribution.validate();
    }
    if (fallback) fallback->validate();
}

const Distribution& SyntheticModelSpec::match(std::string_view prompt) const {
    const auto haystack = lower(prompt);
    const PatternRule* best = nullptr;
    for (const auto& rule : rules) {
        if (best != nullptr && rule.pattern.size() <= best->pattern.size()) continue;
        if (haystack.find(lower(rule.pattern)) != std::string::npos) best = &rule;
    }
    if (best != nullptr) return best->distribution;
    if (fallback) return *fallback;
    throw Error(ErrorCode::NoDefaultDistribution, "model '" + model_id + "' has no rule for the prompt and no default");
}

std::string signature_of(const Label& label) {
    if (!label) return "none";
    std::string dim(to_string(label->dimension()));
    return lower(dim) + "/" + std::string(label->name());
}

Label parse_signature(std::string_view signature) {
    if (signature == "none") return std::nullopt;
    const auto slash = signature.find('/');
    if (slash == std::string_view::npos) throw Error(ErrorCode::MissingSignature, "malformed signature '" + std::string(signature) + "'");
    auto dimension = try_parse_dimension(signature.substr(0, slash));
    if (!dimension) throw Error(ErrorCode::MissingSignature, "malformed signature '" + std::string(signature) + "'");
    auto g = try_validate_subgroup(*dimension, signature.substr(slash + 1));
    if (!g) throw Error(ErrorCode::MissingSignature, "malformed signature '" + std::string(signature) + "'");
    return *g;
}

// ---------------------------------------------------------------------------
// Generation

std::vector<ImageRecord> synth_generate(const SyntheticModelSpec& spec, std::string_view prompt, std::size_t n,
                                        std::int64_t seed, std::uint32_t first_index,
                                        const std::filesystem::path& artifact_dir) {
    if (n == 0) throw Error(ErrorCode::PreconditionViolated, "synth_generate needs n >= 1");
    const auto& dist = spec.match(prompt);

    kernels::CdfTable table;
    std::vector<double> probabilities;
    for (const auto& [label, p] : dist.outcomes) probabilities.push_back(p);
    table.add_row(probabilities);

    std::vector<std::uint32_t> drawn(n);
    const StreamKey key(spec.rng_seed, static_cast<std::uint64_t>(seed));
    kernels::sample_uniform_row(table, key, first_index, drawn);

    if (!artifact_dir.empty()) std::filesystem::create_directories(artifact_dir);
    std::vector<ImageRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ImageRecord r;
        r.index = first_index + static_cast<std::uint32_t>(i);
        r.seed = seed;
        r.model = spec.model_id;
        r.prompt = std::string(prompt);
        r.ref = "synthetic://" + spec.model_id + "/" + std::to_string(seed) + "/" + std::to_string(r.index);
        r.signature = signature_of(dist.outcomes[drawn[i]].first);
        if (!artifact_dir.empty()) {
            r.path = artifact_dir / (file_safe(spec.model_id) + "_" + std::to_string(seed) + "_" + std::to_string(r.index) + ".png");
            png::write_with_text(r.path, {{std::string(kSignatureKey), *r.signature},
                                          {"stereo:model", spec.model_id},
                                          {"stereo:prompt", r.prompt}},
                                 static_cast<std::uint8_t>(drawn[i] * 17 % 256));
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Classification

std::vector<LabeledImage> oracle_classify(std::span<const ImageRecord> images, SocialDimension dimension) {
    std::vector<LabeledImage> out;
    out.reserve(images.size());
    for (const auto& image : images) {
        Label truth = parse_signature(signature_from_record(image));
        if (truth && truth->dimension() != dimension) truth.reset();
        out.push_back(LabeledImage{image.ref, truth, 1.0});
    }
    return out;
}

void ConfusionSpec::validate() const {
    for (const auto& [truth, dist] : rows) {
        dist.validate();
        for (const auto& [predicted, p] : dist.outcomes) {
            if (predicted && predicted->dimension() != dimension) {
                throw Error(ErrorCode::InvalidValue, "confusion row predicts outside " + std::string(to_string(dimension)));
            }
        }
    }
}

const Distribution* ConfusionSpec::row(const Label& truth) const {
    for (const auto& [t, dist] : rows) {
        if (t == truth) return &dist;
    }
    return nullptr;
}

ConfusionSpec ConfusionSpec::identity(SocialDimension dimension) {
    ConfusionSpec spec{dimension, {}};
    for (auto g : subgroups_of(dimension)) spec.rows.emplace_back(g, Distribution::point(g));
    spec.rows.emplace_back(std::nullopt, Distribution::point(std::nullopt));
    return spec;
}

ConfusionSpec ConfusionSpec::uniform_diagonal(SocialDimension dimension, double diagonal, double none_share) {
    ConfusionSpec spec{dimension, {}};
    const auto group = subgroups_of(dimension);
    const double off = (1.0 - diagonal - none_share) / static_cast<double>(group.size() - 1);
    for (auto truth : group) {
        Distribution d;
        for (auto predicted : group) d.outcomes.emplace_back(predicted, predicted == truth ? diagonal : off);
        if (none_share > 0.0) d.outcomes.emplace_back(std::nullopt, none_share);
        spec.rows.emplace_back(truth, std::move(d));
    }
    // Images showing no subgroup of this dimension.
    Distribution none_row;
    const double stray = (1.0 - diagonal) / static_cast<double>(group.size());
    for (auto predicted : group) none_row.outcomes.emplace_back(predicted, stray);
    none_row.outcomes.emplace_back(std::nullopt, diagonal);
    spec.rows.emplace_back(std::nullopt, std::move(none_row));
    spec.validate();
    return spec;
}

std::vector<LabeledImage> noisy_classify(const ConfusionSpec& spec, std::span<const ImageRecord> images,
                                         std::uint64_t seed) {
    // Outcome space: the dimension's subgroups followed by the None-marker.
    const auto group = subgroups_of(spec.dimension);
    const std::size_t width = group.size() + 1;
    auto outcome_index = [&](const Label& l) { return l ? l->index() : group.size(); };

    // Each row lists the true outcome first, then the rest in canonical
    // order. Under one seed a larger diagonal therefore only ever turns
    // misses into hits.
    kernels::CdfTable table;
    std::vector<std::vector<std::uint32_t>> order;
    for (const auto& [truth, dist] : spec.rows) {
        std::vector<double> p(width, 0.0);
        for (const auto& [predicted, q] : dist.outcomes) p[outcome_index(predicted)] += q;
        std::vector<std::uint32_t> perm{static_cast<std::uint32_t>(outcome_index(truth))};
        for (std::uint32_t k = 0; k < width; ++k) {
            if (k != perm.front()) perm.push_back(k);
        }
        std::vector<double> permuted(width);
        for (std::size_t k = 0; k < width; ++k) permuted[k] = p[perm[k]];
        table.add_row(permuted);
        order.push_back(std::move(perm));
    }

    std::vector<std::uint32_t> rows_of(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        Label truth = parse_signature(signature_from_record(images[i]));
        // A signature from another dimension reads as the None-marker here.
        if (truth && truth->dimension() != spec.dimension) truth.reset();
        std::size_t r = 0;
        while (r < spec.rows.size() && spec.rows[r].first != truth) ++r;
        if (r == spec.rows.size()) {
            throw Error(ErrorCode::RowMissing, "confusion matrix has no row for '" + label_token(truth) + "'");
        }
        rows_of[i] = static_cast<std::uint32_t>(r);
    }

    // Runs of images from one generation request with consecutive indices
    // share a stream and go through the kernel in one call.
    std::vector<std::uint32_t> predicted(images.size());
    const auto noise_seed = combine_seed(seed, kNoiseSalt);
    std::size_t start = 0;
    while (start < images.size()) {
        std::size_t end = start + 1;
        while (end < images.size() && images[end].seed == images[start].seed &&
               images[end].index == images[end - 1].index + 1) {
            ++end;
        }
        const StreamKey key(noise_seed, static_cast<std::uint64_t>(images[start].seed));
        kernels::sample_rows(table, std::span(rows_of).subspan(start, end - start), key, images[start].index,
                             std::span(predicted).subspan(start, end - start));
        start = end;
    }

    std::vector<LabeledImage> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto k = order[rows_of[i]][predicted[i]];
        Label label = k < group.size() ? Label(group[k]) : std::nullopt;
        out.push_back(LabeledImage{images[i].ref, label, 1.0});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backends

SyntheticImageBackend::SyntheticImageBackend(SpecSource source, std::filesystem::path artifact_dir)
    : source_(std::move(source)), artifact_dir_(std::move(artifact_dir)) {}

SyntheticImageBackend::SyntheticImageBackend(std::vector<SyntheticModelSpec> specs, std::filesystem::path artifact_dir)
    : artifact_dir_(std::move(artifact_dir)) {
    for (auto& s : specs) {
        s.validate();
        auto id = s.model_id;
        cache_.emplace(std::move(id), std::move(s));
    }
}

const SyntheticModelSpec& SyntheticImageBackend::spec_for(const std::string& model_id) {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(model_id);
    if (it != cache_.end()) return it->second;
    if (!source_) throw Error(ErrorCode::BackendUnavailable, "synthetic backend has no model '" + model_id + "'");
    auto spec = source_(model_id);
    spec.validate();
    return cache_.emplace(model_id, std::move(spec)).first->second;
}

std::vector<ImageRecord> SyntheticImageBackend::generate(const GenerationRequest& request) {
    const auto& spec = spec_for(request.model);
    return synth_generate(spec, request.prompt, request.n, request.seed, request.first_index, artifact_dir_);
}

std::vector<RawLabel> OracleClassifier::classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                                 std::span<const Subgroup>) {
    std::vector<RawLabel> out;
    for (const auto& l : oracle_classify(images, dimension)) out.push_back(RawLabel{label_token(l.label), l.confidence});
    return out;
}

NoisyClassifier::NoisyClassifier(std::vector<ConfusionSpec> specs, std::uint64_t seed)
    : specs_(std::move(specs)), seed_(seed) {
    for (const auto& s : specs_) s.validate();
}

std::vector<RawLabel> NoisyClassifier::classify(std::span<const ImageRecord> images, SocialDimension dimension,
                                                std::span<const Subgroup>) {
    for (const auto& spec : specs_) {
        if (spec.dimension != dimension) continue;
        std::vector<RawLabel> out;
        for (const auto& l : noisy_classify(spec, images, seed_)) out.push_back(RawLabel{label_token(l.label), l.confidence});
        return out;
    }
    throw Error(ErrorCode::RowMissing, "no confusion spec for " + std::string(to_string(dimension)));
}

NoisyClassifier NoisyClassifier::uniform(double diagonal, double none_share, std::uint64_t seed) {
    std::vector<ConfusionSpec> specs;
    for (auto d : kAllDimensions) specs.push_back(ConfusionSpec::uniform_diagonal(d, diagonal, none_share));
    return NoisyClassifier(std::move(specs), seed);
}

}  // namespace stereo
