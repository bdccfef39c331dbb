#include "stereo/dataset/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/tokenizer.hpp>
#include <spdlog/spdlog.h>

#include "stereo/agent/tools.hpp"
#include "stereo/error.hpp"
#include "stereo/prompt_text.hpp"

namespace stereo {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

FileFormat parse_format(std::string_view s) {
    const auto f = lower(trim(s));
    if (f == "csv") return FileFormat::Csv;
    if (f == "tsv") return FileFormat::Tsv;
    if (f == "jsonl" || f == "ndjson") return FileFormat::Jsonl;
    throw Error(ErrorCode::Config, "unknown corpus file format '" + std::string(s) + "'");
}

std::vector<std::string> split_row(const std::string& line, FileFormat format) {
    using Sep = boost::escaped_list_separator<char>;
    const Sep sep = format == FileFormat::Tsv ? Sep('\\', '\t', '"') : Sep('\\', ',', '"');
    boost::tokenizer<Sep> tok(line, sep);
    return {tok.begin(), tok.end()};
}

std::optional<bool> toxic_of(const std::optional<std::string>& label, const AdapterConfig& adapter) {
    if (!label || adapter.toxic_values.empty()) return std::nullopt;
    const auto l = lower(trim(*label));
    return std::any_of(adapter.toxic_values.begin(), adapter.toxic_values.end(),
                       [&](const std::string& v) { return lower(v) == l; });
}

std::string json_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        // Token lists join with spaces; label lists go by majority.
        std::string out;
        for (const auto& t : v) {
            if (!out.empty()) out.push_back(' ');
            out += json_text(t);
        }
        return out;
    }
    if (v.is_null()) return {};
    return v.dump();
}

std::optional<std::string> json_label(const Json& v) {
    if (v.is_null()) return std::nullopt;
    if (!v.is_array()) return json_text(v);
    std::map<std::string, std::size_t> votes;
    std::vector<std::string> order;
    for (const auto& item : v) {
        auto label = item.is_object() && item.contains("label") ? json_text(item["label"]) : json_text(item);
        if (votes[label]++ == 0) order.push_back(label);
    }
    if (order.empty()) return std::nullopt;
    return *std::max_element(order.begin(), order.end(),
                             [&](const auto& a, const auto& b) { return votes[a] < votes[b]; });
}

}  // namespace

std::string_view to_string(Corpus corpus) {
    switch (corpus) {
        case Corpus::SBIC: return "SBIC";
        case Corpus::HateExplain: return "HateExplain";
        case Corpus::DYNAHATE: return "DYNAHATE";
        case Corpus::IHC: return "IHC";
        case Corpus::SMTD: return "SMTD";
    }
    return "?";
}

Corpus parse_corpus(std::string_view name) {
    const auto n = lower(trim(name));
    for (auto c : kAllCorpora) {
        if (lower(to_string(c)) == n) return c;
    }
    if (n == "dynahate" || n == "dyna-hate") return Corpus::DYNAHATE;
    if (n == "hatexplain" || n == "hate-explain") return Corpus::HateExplain;
    throw Error(ErrorCode::UnknownCorpus, "unknown corpus '" + std::string(name) + "'");
}

AdapterConfig default_adapter(Corpus corpus) {
    switch (corpus) {
        case Corpus::SBIC: return {FileFormat::Csv, "post", "", "offensiveYN", {"1.0", "1", "0.5"}};
        case Corpus::HateExplain: return {FileFormat::Jsonl, "post_tokens", "post_id", "annotators", {"hatespeech", "offensive"}};
        case Corpus::DYNAHATE: return {FileFormat::Csv, "text", "acl.id", "label", {"hate"}};
        case Corpus::IHC: return {FileFormat::Tsv, "post", "", "class", {"implicit_hate", "explicit_hate"}};
        case Corpus::SMTD: return {FileFormat::Csv, "text", "", "is_toxic", {"toxic", "1", "true", "yes"}};
    }
    throw Error(ErrorCode::UnknownCorpus, "unknown corpus");
}

std::map<Corpus, AdapterConfig> load_adapter_configs(const std::filesystem::path& ini) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(ini.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::Config, e.what());
    }
    std::map<Corpus, AdapterConfig> out;
    for (auto c : kAllCorpora) out[c] = default_adapter(c);
    for (const auto& [section, body] : tree) {
        const auto corpus = parse_corpus(section);
        auto& a = out[corpus];
        if (auto v = body.get_optional<std::string>("format")) a.format = parse_format(*v);
        if (auto v = body.get_optional<std::string>("text")) a.text_field = trim(*v);
        if (auto v = body.get_optional<std::string>("id")) a.id_field = trim(*v);
        if (auto v = body.get_optional<std::string>("label")) a.label_field = trim(*v);
        if (auto v = body.get_optional<std::string>("toxic")) a.toxic_values = split_list(*v);
        if (a.text_field.empty()) throw Error(ErrorCode::Config, "[" + section + "] needs a text field");
    }
    return out;
}

IngestResult ingest(Corpus corpus, const std::filesystem::path& path) { return ingest(corpus, path, default_adapter(corpus)); }

IngestResult ingest(Corpus corpus, const std::filesystem::path& path, const AdapterConfig& adapter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableFile, "cannot read " + path.string());

    IngestResult result;
    std::string line;
    std::size_t line_no = 0;
    auto reject = [&](std::string reason) { result.diagnostics.push_back({line_no, std::move(reason)}); };

    if (adapter.format == FileFormat::Jsonl) {
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            auto row = Json::parse(line, nullptr, false);
            if (row.is_discarded() || !row.is_object()) {
                reject("not a JSON object");
                continue;
            }
            if (!row.contains(adapter.text_field)) {
                reject("missing field '" + adapter.text_field + "'");
                continue;
            }
            CorpusRecord r;
            r.corpus = corpus;
            r.text = trim(json_text(row[adapter.text_field]));
            if (r.text.empty()) {
                reject("empty text");
                continue;
            }
            r.record_id = !adapter.id_field.empty() && row.contains(adapter.id_field) ? json_text(row[adapter.id_field])
                                                                                      : std::to_string(line_no);
            if (!adapter.label_field.empty() && row.contains(adapter.label_field)) {
                r.toxicity_label = json_label(row[adapter.label_field]);
            }
            r.toxic = toxic_of(r.toxicity_label, adapter);
            result.records.push_back(std::move(r));
        }
    } else {
        std::vector<std::string> header;
        while (header.empty() && std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            try {
                header = split_row(line, adapter.format);
            } catch (const boost::escaped_list_error& e) {
                throw Error(ErrorCode::AllRowsRejected, path.string() + ": unreadable header: " + e.what());
            }
        }
        auto column = [&](const std::string& name) -> std::optional<std::size_t> {
            if (name.empty()) return std::nullopt;
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (lower(trim(header[i])) == lower(name)) return i;
            }
            return std::nullopt;
        };
        const auto text_col = column(adapter.text_field);
        if (!header.empty() && !text_col) {
            throw Error(ErrorCode::AllRowsRejected, path.string() + ": no '" + adapter.text_field + "' column");
        }
        const auto id_col = column(adapter.id_field);
        const auto label_col = column(adapter.label_field);
        std::size_t row_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            ++row_no;
            std::vector<std::string> cells;
            try {
                cells = split_row(line, adapter.format);
            } catch (const boost::escaped_list_error& e) {
                reject(std::string("unparseable row: ") + e.what());
                continue;
            }
            if (cells.size() != header.size()) {
                reject("expected " + std::to_string(header.size()) + " columns, found " + std::to_string(cells.size()));
                continue;
            }
            CorpusRecord r;
            r.corpus = corpus;
            r.text = trim(cells[*text_col]);
            if (r.text.empty()) {
                reject("empty text");
                continue;
            }
            r.record_id = id_col ? trim(cells[*id_col]) : std::to_string(row_no);
            if (label_col) r.toxicity_label = trim(cells[*label_col]);
            r.toxic = toxic_of(r.toxicity_label, adapter);
            result.records.push_back(std::move(r));
        }
    }
    for (const auto& d : result.diagnostics) spdlog::warn("{}:{}: skipped ({})", path.string(), d.line, d.reason);
    if (result.records.empty()) {
        throw Error(ErrorCode::AllRowsRejected, path.string() + ": no usable rows (" +
                                                    std::to_string(result.diagnostics.size()) + " rejected)");
    }
    return result;
}

ExtractResult extract_pairs(std::span<const CorpusRecord> records, ChatProvider& provider, const ExtractOptions& options) {
    if (records.empty()) throw Error(ErrorCode::PreconditionViolated, "no records to extract from");

    struct Outcome {
        enum class Kind { Skipped, None, Pair, Failed } kind = Kind::Skipped;
        std::optional<InstructionPair> pair;
        std::string error;
    };
    std::vector<Outcome> outcomes(records.size());
    const int threads = static_cast<int>(std::clamp<std::size_t>(options.concurrency, 1, 64));

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        auto& out = outcomes[i];
        if (r.toxic == false && !options.include_non_toxic) continue;
        try {
            auto pair = instruction_generate(r.text, provider);
            pair.prompt = people_form(pair.prompt);
            pair.source = lower(to_string(r.corpus)) + ":" + r.record_id;
            out.pair = std::move(pair);
            out.kind = Outcome::Kind::Pair;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NoStereotypeFound) {
                out.kind = Outcome::Kind::None;
            } else {
                out.kind = Outcome::Kind::Failed;
                out.error = e.what();
            }
        } catch (const std::exception& e) {
            out.kind = Outcome::Kind::Failed;
            out.error = e.what();
        }
    }

    ExtractResult result;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& out = outcomes[i];
        switch (out.kind) {
            case Outcome::Kind::Skipped: ++result.skipped_non_toxic; break;
            case Outcome::Kind::None: ++result.attempted; ++result.no_stereotype; break;
            case Outcome::Kind::Pair: ++result.attempted; result.store.add(std::move(*out.pair)); break;
            case Outcome::Kind::Failed:
                ++result.attempted;
                result.failures.push_back({lower(to_string(records[i].corpus)) + ":" + records[i].record_id, out.error});
                break;
        }
    }
    if (result.attempted > 0) {
        const double rate = static_cast<double>(result.failures.size()) / static_cast<double>(result.attempted);
        if (rate > options.failure_cap) {
            throw Error(ErrorCode::ExtractionFailed, std::to_string(result.failures.size()) + " of " +
                                                         std::to_string(result.attempted) +
                                                         " extractions failed; first: " + result.failures.front().error);
        }
    }
    return result;
}

}  // namespace stereo
