#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stereo/domain.hpp"

namespace stereo {

struct BenchmarkScore {
    double value = 0.0;
    std::size_t n = 0;

    friend bool operator==(const BenchmarkScore&, const BenchmarkScore&) = default;
};

struct StoredPair {
    InstructionPair pair;
    std::size_t frequency = 1;
    std::map<std::string, BenchmarkScore> scores;  // keyed by canonical model id

    friend bool operator==(const StoredPair&, const StoredPair&) = default;
};

/// Lowercased, whitespace-collapsed description with any "the people
/// who" / "people who" prefix and emphasis suffix removed.
std::string normalize_description(std::string_view prompt);

/// (normalized description, subgroup): two pairs with equal keys are the
/// same hypothesis.
std::string dedupe_key(const InstructionPair& pair);

/// Deduplicated instruction pairs in first-seen order. Readers share a
/// store through shared_ptr<const InstructionStore>; writers build a new
/// one.
class InstructionStore {
public:
    /// Merges into an existing entry (frequencies add, first provenance
    /// kept) or appends. Returns true when the pair was new.
    bool add(InstructionPair pair, std::size_t frequency = 1);
    bool add(StoredPair entry);

    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::span<const StoredPair> pairs() const noexcept { return pairs_; }

    const StoredPair* find(const InstructionPair& pair) const;

    /// Upsert keyed by (pair, canonical model id). Throws UnknownPair.
    void record_score(const InstructionPair& pair, const std::string& model, BenchmarkScore score);

    friend bool operator==(const InstructionStore& a, const InstructionStore& b) { return a.pairs_ == b.pairs_; }

private:
    std::vector<StoredPair> pairs_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr int kStoreVersion = 1;

void persist(const InstructionStore& store, const std::filesystem::path& path);
/// Throws IoError (with the 1-based line number), VersionMismatch or
/// TaxonomyHashMismatch.
InstructionStore load_store(const std::filesystem::path& path);

/// Attaches per-model scores; the whole batch is checked before anything
/// is written. Throws UnknownPair.
void record_benchmark_scores(InstructionStore& store, const std::string& model,
                             std::span<const std::pair<InstructionPair, StereotypeScore>> scores);

struct StoreStats {
    std::size_t total_pairs = 0;
    std::array<std::size_t, 3> per_dimension{};
    std::array<double, 3> fractions{};
    std::array<std::size_t, kSubgroupCount> per_subgroup{};
};

/// Throws EmptyStore.
StoreStats stats(const InstructionStore& store);
/// "gender 55.0%" style lines followed by per-subgroup counts.
std::string render_stats(const StoreStats& s);
Json to_json(const StoreStats& s);

/// Per subgroup stratum, keeps round(fraction * size) pairs (at least one)
/// chosen by a seeded hash of the pair, so the choice is independent of
/// store order. Output is grouped by stratum in canonical order, store
/// order inside a stratum. Throws EmptyStore or InvalidValue.
std::vector<InstructionPair> stratified_sample(const InstructionStore& store, double fraction, std::uint64_t seed);

/// Per-stratum target size used by stratified_sample.
std::size_t stratum_target(std::size_t stratum_size, double fraction);

}  // namespace stereo
