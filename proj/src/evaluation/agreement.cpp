#include "stereo/evaluation/agreement.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <boost/tokenizer.hpp>

#include "stereo/error.hpp"

namespace stereo {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    using Sep = boost::escaped_list_separator<char>;
    boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
    std::vector<std::string> out;
    for (const auto& t : tok) out.push_back(trim(t));
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\\") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

Label within(const Label& label, SocialDimension dimension) {
    if (label && label->dimension() == dimension) return label;
    return std::nullopt;
}

std::size_t dim_index(SocialDimension d) { return static_cast<std::size_t>(d); }

}  // namespace

AnnotationFile parse_annotations(std::istream& in, const std::string& source) {
    AnnotationFile file;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::MalformedFile, source + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        try {
            cells = split_csv(line);
        } catch (const boost::escaped_list_error& e) {
            fail(e.what());
        }
        if (!header) {
            if (cells != std::vector<std::string>{"image_ref", "annotator_id", "label"}) {
                fail("expected header image_ref,annotator_id,label");
            }
            header = true;
            continue;
        }
        if (cells.size() != 3) fail("expected 3 columns, got " + std::to_string(cells.size()));
        if (cells[0].empty()) fail("empty image_ref");
        Annotation a{cells[0], cells[1], std::nullopt};
        if (!is_none_marker(cells[2])) {
            try {
                a.label = resolve_subgroup(cells[2]);
            } catch (const Error& e) {
                fail(e.what());
            }
        }
        file.entries.push_back(std::move(a));
    }
    if (!header) throw Error(ErrorCode::MalformedFile, source + ": empty annotation file");
    return file;
}

AnnotationFile load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_annotations(in, path.string());
}

void write_annotations(std::ostream& out, const AnnotationFile& file) {
    out << "image_ref,annotator_id,label\n";
    for (const auto& a : file.entries) {
        out << csv_field(a.image_ref) << ',' << csv_field(a.annotator_id) << ',' << label_token(a.label) << '\n';
    }
}

HumanLabels aggregate_annotations(const AnnotationFile& file) {
    if (file.entries.empty()) throw Error(ErrorCode::MalformedFile, "annotation file has no entries");
    // Votes per image: slot 0 is the None-marker, slot 1 + ordinal a subgroup.
    std::map<std::string, std::array<std::size_t, kSubgroupCount + 1>> votes;
    for (const auto& a : file.entries) {
        auto& v = votes[a.image_ref];
        ++v[a.label ? 1 + a.label->ordinal() : 0];
    }
    HumanLabels out;
    for (const auto& [ref, v] : votes) {
        AggregatedLabel agg;
        std::size_t best = 0;
        std::size_t best_slot = 0;
        std::size_t at_best = 0;
        for (std::size_t s = 0; s < v.size(); ++s) {
            agg.annotators += v[s];
            if (v[s] > best) {
                best = v[s];
                best_slot = s;
                at_best = 1;
            } else if (v[s] == best && best > 0) {
                ++at_best;
            }
        }
        agg.tied = at_best > 1;
        if (!agg.tied && best_slot > 0) agg.label = Subgroup::from_ordinal(best_slot - 1);
        out.emplace(ref, agg);
    }
    return out;
}

double PromptAgreement::gap() const { return std::fabs(agent.value - human.value); }

std::vector<std::string> missing_images(std::span<const StereotypeReport> reports, const HumanLabels& human) {
    std::vector<std::string> out;
    for (const auto& r : reports) {
        for (const auto& l : r.labels) {
            if (!human.count(l.image_ref)) out.push_back(l.image_ref);
        }
    }
    return out;
}

AgreementReport compare(std::span<const StereotypeReport> reports, const HumanLabels& human, const DecisionRule& rule) {
    if (reports.empty()) throw Error(ErrorCode::PreconditionViolated, "no reports to compare");
    if (const auto missing = missing_images(reports, human); !missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 10) list += ", ... (" + std::to_string(missing.size()) + " total)";
        throw Error(ErrorCode::CoverageGap, "images without human labels: " + list);
    }

    AgreementReport out;
    std::array<double, 3> gap_sum{};
    std::array<std::size_t, 3> matches{};
    std::size_t matched = 0;
    for (const auto& r : reports) {
        if (r.labels.empty()) {
            throw Error(ErrorCode::PreconditionViolated, "report for '" + r.query + "' has no labeled images");
        }
        const auto dim = r.pair.dimension();
        std::vector<Label> labels;
        labels.reserve(r.labels.size());
        for (const auto& l : r.labels) labels.push_back(within(human.at(l.image_ref).label, dim));

        PromptAgreement row{r.query, r.pair, r.score, score_calculate(labels)};
        row.agent_verdict = decide_verdict(row.agent, dim, rule);
        row.human_verdict = decide_verdict(row.human, dim, rule);

        const auto d = dim_index(dim);
        gap_sum[d] += row.gap();
        ++out.prompts_per_dimension[d];
        if (row.verdict_match()) {
            ++matches[d];
            ++matched;
        }
        out.rows.push_back(std::move(row));
    }
    for (std::size_t d = 0; d < 3; ++d) {
        if (out.prompts_per_dimension[d] == 0) continue;
        const auto n = static_cast<double>(out.prompts_per_dimension[d]);
        out.mean_gap[d] = gap_sum[d] / n;
        out.verdict_accuracy_per_dimension[d] = static_cast<double>(matches[d]) / n;
    }
    out.verdict_accuracy = static_cast<double>(matched) / static_cast<double>(out.rows.size());
    return out;
}

Json to_json(const AgreementReport& report) {
    Json j;
    j["prompts"] = report.rows.size();
    j["verdict_accuracy"] = report.verdict_accuracy;
    Json dims = Json::object();
    for (auto d : kAllDimensions) {
        const auto i = dim_index(d);
        Json e;
        e["prompts"] = report.prompts_per_dimension[i];
        e["mean_gap"] = report.mean_gap[i] ? Json(*report.mean_gap[i]) : Json(nullptr);
        e["verdict_accuracy"] =
            report.verdict_accuracy_per_dimension[i] ? Json(*report.verdict_accuracy_per_dimension[i]) : Json(nullptr);
        dims[std::string(to_string(d))] = e;
    }
    j["dimensions"] = dims;
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back(Json{{"query", r.query},
                            {"pair", to_json(r.pair)},
                            {"agent_score", r.agent.value},
                            {"human_score", r.human.value},
                            {"gap", r.gap()},
                            {"agent_verdict", to_string(r.agent_verdict)},
                            {"human_verdict", to_string(r.human_verdict)},
                            {"match", r.verdict_match()}});
    }
    j["rows"] = rows;
    return j;
}

std::string render_table(const AgreementReport& report) {
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-4s %-9s %-15s %6s %6s %6s  %-15s %-15s\n", "#", "dimension", "subgroup", "agent",
                  "human", "gap", "agent verdict", "human verdict");
    out += buf;
    std::size_t i = 0;
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%-4zu %-9s %-15s %6.3f %6.3f %6.3f  %-15s %-15s%s\n", ++i,
                      std::string(to_string(r.pair.dimension())).c_str(), r.pair.subgroup.display_name().c_str(),
                      r.agent.value, r.human.value, r.gap(), std::string(to_string(r.agent_verdict)).c_str(),
                      std::string(to_string(r.human_verdict)).c_str(), r.verdict_match() ? "" : "  *");
        out += buf;
    }
    out += "\n";
    for (auto d : kAllDimensions) {
        const auto k = dim_index(d);
        if (!report.mean_gap[k]) continue;
        std::snprintf(buf, sizeof buf, "%-9s prompts %4zu  mean gap %6.2f%%  verdict accuracy %6.2f%%\n",
                      std::string(to_string(d)).c_str(), report.prompts_per_dimension[k], 100.0 * *report.mean_gap[k],
                      100.0 * *report.verdict_accuracy_per_dimension[k]);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "overall   prompts %4zu  verdict accuracy %6.2f%%\n", report.rows.size(),
                  100.0 * report.verdict_accuracy);
    out += buf;
    return out;
}

}  // namespace stereo
