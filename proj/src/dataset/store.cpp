#include "stereo/dataset/store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stereo/backends/models.hpp"
#include "stereo/error.hpp"
#include "stereo/prompt_text.hpp"
#include "stereo/rng.hpp"

namespace stereo {

std::string normalize_description(std::string_view prompt) {
    auto rest = people_rest(prompt);
    for (auto& c : rest) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return rest;
}

std::string dedupe_key(const InstructionPair& pair) {
    return normalize_description(pair.prompt) + '\x1f' + std::to_string(pair.subgroup.ordinal());
}

bool InstructionStore::add(InstructionPair pair, std::size_t frequency) {
    return add(StoredPair{std::move(pair), frequency, {}});
}

bool InstructionStore::add(StoredPair entry) {
    if (entry.frequency == 0) throw Error(ErrorCode::InvalidValue, "pair frequency must be positive");
    auto key = dedupe_key(entry.pair);
    if (auto it = index_.find(key); it != index_.end()) {
        auto& existing = pairs_[it->second];
        existing.frequency += entry.frequency;
        for (auto& [model, score] : entry.scores) existing.scores[model] = score;
        return false;
    }
    index_.emplace(std::move(key), pairs_.size());
    pairs_.push_back(std::move(entry));
    return true;
}

const StoredPair* InstructionStore::find(const InstructionPair& pair) const {
    auto it = index_.find(dedupe_key(pair));
    return it == index_.end() ? nullptr : &pairs_[it->second];
}

void InstructionStore::record_score(const InstructionPair& pair, const std::string& model, BenchmarkScore score) {
    auto it = index_.find(dedupe_key(pair));
    if (it == index_.end()) {
        throw Error(ErrorCode::UnknownPair, "no stored pair ('" + pair.prompt + "', " + std::string(pair.subgroup.name()) + ")");
    }
    pairs_[it->second].scores[canonical_model_id(model)] = score;
}

void record_benchmark_scores(InstructionStore& store, const std::string& model,
                             std::span<const std::pair<InstructionPair, StereotypeScore>> scores) {
    for (const auto& [pair, score] : scores) {
        if (!store.find(pair)) {
            throw Error(ErrorCode::UnknownPair,
                        "no stored pair ('" + pair.prompt + "', " + std::string(pair.subgroup.name()) + ")");
        }
    }
    for (const auto& [pair, score] : scores) store.record_score(pair, model, BenchmarkScore{score.value, score.n_total});
}

// ---------------------------------------------------------------------------
// Persistence

void persist(const InstructionStore& store, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    Json header;
    header["spig_version"] = kStoreVersion;
    header["taxonomy_hash"] = taxonomy_hash();
    out << header.dump() << '\n';
    for (const auto& entry : store.pairs()) {
        Json row = to_json(entry.pair);
        if (entry.frequency != 1) row["frequency"] = entry.frequency;
        if (!entry.scores.empty()) {
            Json scores = Json::object();
            for (const auto& [model, s] : entry.scores) scores[model] = Json{{"value", s.value}, {"n", s.n}};
            row["scores"] = std::move(scores);
        }
        out << row.dump() << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

InstructionStore load_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    auto where = [&](std::size_t line) { return path.string() + ":" + std::to_string(line); };

    std::string text;
    std::size_t line_no = 0;
    if (!std::getline(in, text)) throw Error(ErrorCode::IoError, where(1) + ": missing header");
    ++line_no;
    auto header = Json::parse(text, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("spig_version")) {
        throw Error(ErrorCode::IoError, where(1) + ": malformed header");
    }
    if (header["spig_version"] != kStoreVersion) {
        throw Error(ErrorCode::VersionMismatch, where(1) + ": store version " + header["spig_version"].dump() +
                                                    ", expected " + std::to_string(kStoreVersion));
    }
    if (header.value("taxonomy_hash", std::string{}) != taxonomy_hash()) {
        throw Error(ErrorCode::TaxonomyHashMismatch,
                    where(1) + ": taxonomy hash " + header.value("taxonomy_hash", std::string{}) + " != " + taxonomy_hash());
    }

    InstructionStore store;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        auto row = Json::parse(text, nullptr, false);
        if (row.is_discarded() || !row.is_object()) throw Error(ErrorCode::IoError, where(line_no) + ": malformed row");
        try {
            StoredPair entry{pair_from_json(row), row.value("frequency", std::size_t{1}), {}};
            if (row.contains("scores")) {
                for (const auto& [model, s] : row["scores"].items()) {
                    entry.scores[model] = BenchmarkScore{s.at("value").get<double>(), s.at("n").get<std::size_t>()};
                }
            }
            store.add(std::move(entry));
        } catch (const Error& e) {
            throw Error(ErrorCode::IoError, where(line_no) + ": " + e.what(), e.code());
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::IoError, where(line_no) + ": " + e.what());
        }
    }
    return store;
}

// ---------------------------------------------------------------------------
// Statistics and sampling

StoreStats stats(const InstructionStore& store) {
    if (store.empty()) throw Error(ErrorCode::EmptyStore, "store has no pairs");
    StoreStats s;
    s.total_pairs = store.size();
    for (const auto& entry : store.pairs()) {
        ++s.per_dimension[static_cast<std::size_t>(entry.pair.dimension())];
        ++s.per_subgroup[entry.pair.subgroup.ordinal()];
    }
    for (std::size_t d = 0; d < 3; ++d) {
        s.fractions[d] = static_cast<double>(s.per_dimension[d]) / static_cast<double>(s.total_pairs);
    }
    return s;
}

std::string render_stats(const StoreStats& s) {
    std::ostringstream out;
    out << "total pairs: " << s.total_pairs << '\n';
    char buf[64];
    for (auto d : kAllDimensions) {
        const auto i = static_cast<std::size_t>(d);
        std::snprintf(buf, sizeof buf, "%-9s %6zu  %5.1f%%\n", std::string(to_string(d)).c_str(), s.per_dimension[i],
                      100.0 * s.fractions[i]);
        out << buf;
    }
    for (auto g : all_subgroups()) {
        std::snprintf(buf, sizeof buf, "  %-9s %-15s %6zu\n", std::string(to_string(g.dimension())).c_str(),
                      std::string(g.name()).c_str(), s.per_subgroup[g.ordinal()]);
        out << buf;
    }
    return out.str();
}

Json to_json(const StoreStats& s) {
    Json j;
    j["total_pairs"] = s.total_pairs;
    Json dims = Json::object();
    for (auto d : kAllDimensions) {
        const auto i = static_cast<std::size_t>(d);
        dims[std::string(to_string(d))] = Json{{"count", s.per_dimension[i]}, {"fraction", s.fractions[i]}};
    }
    j["dimensions"] = std::move(dims);
    Json subs = Json::object();
    for (auto g : all_subgroups()) subs[std::string(to_string(g.dimension())) + "/" + std::string(g.name())] = s.per_subgroup[g.ordinal()];
    j["subgroups"] = std::move(subs);
    return j;
}

std::size_t stratum_target(std::size_t stratum_size, double fraction) {
    if (stratum_size == 0) return 0;
    const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(stratum_size)));
    return std::clamp<std::size_t>(m, 1, stratum_size);
}

std::vector<InstructionPair> stratified_sample(const InstructionStore& store, double fraction, std::uint64_t seed) {
    if (store.empty()) throw Error(ErrorCode::EmptyStore, "store has no pairs");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidValue, "sample fraction must be in (0, 1]");
    }
    std::array<std::vector<std::size_t>, kSubgroupCount> strata;
    for (std::size_t i = 0; i < store.size(); ++i) strata[store.pairs()[i].pair.subgroup.ordinal()].push_back(i);

    std::vector<InstructionPair> out;
    for (std::size_t ordinal = 0; ordinal < kSubgroupCount; ++ordinal) {
        auto& members = strata[ordinal];
        const auto m = stratum_target(members.size(), fraction);
        if (m == 0) continue;
        const StreamKey key(seed, ordinal);
        std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
        ranked.reserve(members.size());
        for (auto i : members) ranked.emplace_back(key.bits(fnv1a64(dedupe_key(store.pairs()[i].pair))), i);
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(m), ranked.end());
        std::vector<std::size_t> chosen;
        for (std::size_t k = 0; k < m; ++k) chosen.push_back(ranked[k].second);
        std::sort(chosen.begin(), chosen.end());
        for (auto i : chosen) out.push_back(store.pairs()[i].pair);
    }
    return out;
}

}  // namespace stereo
