#include "stereo/evaluation/accuracy.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "stereo/agent/tools.hpp"
#include "stereo/backends/synthetic.hpp"
#include "stereo/error.hpp"
#include "stereo/kernels.hpp"
#include "stereo/rng.hpp"

namespace stereo {

std::vector<GoldenIntent> load_golden_intents(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<GoldenIntent> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = Json::parse(line);
            out.push_back({j.at("query").get<std::string>(), intent_from_json(j.at("expected"))});
        } catch (const std::exception& e) {
            throw Error(ErrorCode::MalformedFile, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

bool intent_matches(const DetectionIntent& expected, const DetectionIntent& got) {
    return canonical_model_id(expected.model) == canonical_model_id(got.model) && expected.dimension == got.dimension &&
           expected.requested_subgroup == got.requested_subgroup &&
           expected.open_text.has_value() == got.open_text.has_value();
}

IntentAccuracy intent_accuracy(std::span<const GoldenIntent> golden, ChatProvider& provider,
                               std::string_view default_model, std::size_t retries) {
    if (golden.empty()) throw Error(ErrorCode::PreconditionViolated, "golden set is empty");
    IntentAccuracy acc;
    acc.total = golden.size();
    for (std::size_t i = 0; i < golden.size(); ++i) {
        const auto& g = golden[i];
        try {
            auto got = intention_understand(g.query, provider, default_model, retries);
            if (intent_matches(g.expected, got)) {
                ++acc.correct;
            } else {
                acc.failures.push_back({i, g.query, g.expected, std::move(got), "intent differs"});
            }
        } catch (const Error& e) {
            acc.failures.push_back({i, g.query, g.expected, std::nullopt, e.what()});
        }
    }
    return acc;
}

Json to_json(const IntentAccuracy& acc) {
    Json j;
    j["correct"] = acc.correct;
    j["total"] = acc.total;
    j["accuracy"] = acc.fraction();
    Json failures = Json::array();
    for (const auto& f : acc.failures) {
        Json e{{"index", f.index}, {"query", f.query}, {"expected", to_json(f.expected)}};
        e["got"] = f.got ? to_json(*f.got) : Json(nullptr);
        e["error"] = f.error;
        failures.push_back(e);
    }
    j["failures"] = failures;
    return j;
}

std::vector<ImageRecord> signed_test_set(SocialDimension dimension, std::size_t per_subgroup, std::uint64_t seed) {
    std::vector<ImageRecord> out;
    out.reserve(per_subgroup * subgroup_count(dimension));
    for (const auto g : subgroups_of(dimension)) {
        const auto image_seed = static_cast<std::int64_t>(combine_seed(seed, g.ordinal()) >> 11);
        const auto sig = signature_of(g);
        for (std::size_t k = 0; k < per_subgroup; ++k) {
            ImageRecord r;
            r.ref = "signed://" + sig + "/" + std::to_string(k);
            r.model = "signed";
            r.prompt = "test image";
            r.seed = image_seed;
            r.index = static_cast<std::uint32_t>(k);
            r.signature = sig;
            out.push_back(std::move(r));
        }
    }
    return out;
}

ClassifierAccuracy classifier_accuracy(ClassifierBackend& a, ClassifierBackend& b, std::span<const ImageRecord> test_set,
                                       SocialDimension dimension) {
    const auto groups = subgroups_of(dimension);
    const auto k = groups.size();

    std::vector<ImageRecord> images;
    std::vector<std::uint32_t> truth;
    for (const auto& r : test_set) {
        if (!r.signature) throw Error(ErrorCode::MissingSignature, "test image " + r.ref + " is unsigned");
        const auto label = parse_signature(*r.signature);
        if (!label || label->dimension() != dimension) continue;
        images.push_back(r);
        truth.push_back(static_cast<std::uint32_t>(label->index()));
    }
    ClassifierAccuracy acc;
    acc.dimension = dimension;
    acc.subgroups.assign(groups.begin(), groups.end());
    acc.support = kernels::count_codes(truth, k);
    std::string uncovered;
    for (std::size_t g = 0; g < k; ++g) {
        if (acc.support[g] == 0) uncovered += (uncovered.empty() ? "" : ", ") + std::string(groups[g].name());
    }
    if (!uncovered.empty()) {
        throw Error(ErrorCode::MissingSubgroupCoverage,
                    std::string(to_string(dimension)) + " test set has no images for " + uncovered);
    }

    auto accuracy_of = [&](ClassifierBackend& backend) {
        const auto labels = classify_batch(backend, images, dimension);
        std::vector<std::uint32_t> predicted(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            // The None-marker gets code k, which never equals a truth code.
            predicted[i] = labels[i].label ? static_cast<std::uint32_t>(labels[i].label->index())
                                           : static_cast<std::uint32_t>(k);
        }
        const auto hits = kernels::matches_per_category(truth, predicted, k);
        std::vector<double> out(k);
        for (std::size_t g = 0; g < k; ++g) out[g] = static_cast<double>(hits[g]) / static_cast<double>(acc.support[g]);
        return out;
    };
    acc.accuracy_a = accuracy_of(a);
    acc.accuracy_b = accuracy_of(b);
    acc.mean_a = std::accumulate(acc.accuracy_a.begin(), acc.accuracy_a.end(), 0.0) / static_cast<double>(k);
    acc.mean_b = std::accumulate(acc.accuracy_b.begin(), acc.accuracy_b.end(), 0.0) / static_cast<double>(k);
    return acc;
}

Json to_json(const ClassifierAccuracy& acc) {
    Json j;
    j["dimension"] = to_string(acc.dimension);
    Json rows = Json::array();
    for (std::size_t g = 0; g < acc.subgroups.size(); ++g) {
        rows.push_back(Json{{"subgroup", acc.subgroups[g].name()},
                            {"support", acc.support[g]},
                            {"accuracy_a", acc.accuracy_a[g]},
                            {"accuracy_b", acc.accuracy_b[g]}});
    }
    j["subgroups"] = rows;
    j["mean_a"] = acc.mean_a;
    j["mean_b"] = acc.mean_b;
    j["mean_gap"] = acc.mean_gap();
    return j;
}

std::string render_table(const ClassifierAccuracy& acc, std::string_view name_a, std::string_view name_b) {
    std::string out;
    char buf[256];
    const std::string a(name_a);
    const std::string b(name_b);
    std::snprintf(buf, sizeof buf, "%-15s %7s %8s %8s\n", "subgroup", "n", a.c_str(), b.c_str());
    out += buf;
    for (std::size_t g = 0; g < acc.subgroups.size(); ++g) {
        std::snprintf(buf, sizeof buf, "%-15s %7zu %7.1f%% %7.1f%%\n", acc.subgroups[g].display_name().c_str(),
                      acc.support[g], 100.0 * acc.accuracy_a[g], 100.0 * acc.accuracy_b[g]);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-15s %7s %7.1f%% %7.1f%%  gap %+.1f points\n", "mean", "", 100.0 * acc.mean_a,
                  100.0 * acc.mean_b, 100.0 * acc.mean_gap());
    out += buf;
    return out;
}

}  // namespace stereo
