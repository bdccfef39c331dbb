#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereo/backends/chat.hpp"
#include "stereo/dataset/store.hpp"

namespace stereo {

enum class Corpus { SBIC, HateExplain, DYNAHATE, IHC, SMTD };

inline constexpr std::array<Corpus, 5> kAllCorpora = {Corpus::SBIC, Corpus::HateExplain, Corpus::DYNAHATE, Corpus::IHC,
                                                      Corpus::SMTD};

std::string_view to_string(Corpus corpus);
/// Case-insensitive. Throws UnknownCorpus.
Corpus parse_corpus(std::string_view name);

struct CorpusRecord {
    Corpus corpus = Corpus::SMTD;
    std::string record_id;
    std::string text;
    std::optional<std::string> toxicity_label;
    /// Derived from toxicity_label through the adapter's toxic values;
    /// unset when the corpus row carries no label.
    std::optional<bool> toxic;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

enum class FileFormat { Csv, Tsv, Jsonl };

/// Column or field mapping for one corpus file.
struct AdapterConfig {
    FileFormat format = FileFormat::Csv;
    std::string text_field;
    /// Empty means "use the 1-based row number".
    std::string id_field;
    std::string label_field;
    /// Label values (case-insensitive) that mark a row toxic.
    std::vector<std::string> toxic_values;

    friend bool operator==(const AdapterConfig&, const AdapterConfig&) = default;
};

/// Built-in mapping for each corpus's common release layout.
AdapterConfig default_adapter(Corpus corpus);

/// Reads [sbic], [hateexplain], ... sections (keys: format, text, id,
/// label, toxic as a comma list) over the built-in defaults. Throws
/// Config or UnknownCorpus.
std::map<Corpus, AdapterConfig> load_adapter_configs(const std::filesystem::path& ini);

struct IngestDiagnostic {
    std::size_t line = 0;
    std::string reason;
};

struct IngestResult {
    std::vector<CorpusRecord> records;
    std::vector<IngestDiagnostic> diagnostics;
};

/// Rows failing the adapter schema are skipped and reported in
/// diagnostics. Throws UnreadableFile or AllRowsRejected.
IngestResult ingest(Corpus corpus, const std::filesystem::path& path, const AdapterConfig& adapter);
IngestResult ingest(Corpus corpus, const std::filesystem::path& path);

struct ExtractOptions {
    std::size_t concurrency = 4;
    /// Largest tolerated fraction of records whose provider call failed.
    double failure_cap = 0.2;
    /// Keep rows the corpus labels non-toxic.
    bool include_non_toxic = false;
};

struct ExtractFailure {
    std::string source;
    std::string error;
};

struct ExtractResult {
    InstructionStore store;
    std::size_t attempted = 0;
    std::size_t no_stereotype = 0;
    std::size_t skipped_non_toxic = 0;
    std::vector<ExtractFailure> failures;
};

/// Runs instruction_generate per record, rewrites prompts to the
/// "people who ..." form, tags provenance "<corpus>:<record id>" and
/// dedupes. Output order follows the input. Throws ExtractionFailed when
/// failures exceed the cap.
ExtractResult extract_pairs(std::span<const CorpusRecord> records, ChatProvider& provider,
                            const ExtractOptions& options = {});

}  // namespace stereo
