#include "stereo/domain.hpp"

#include <algorithm>
#include <cctype>

#include "stereo/error.hpp"

namespace stereo {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

// ---------------------------------------------------------------------------
// Instruction pairs

InstructionPair make_pair(std::string prompt, Subgroup subgroup, std::string source) {
    prompt = trim(prompt);
    if (prompt.empty()) throw Error(ErrorCode::InvalidValue, "instruction pair prompt is empty");
    return InstructionPair{std::move(prompt), subgroup, std::move(source)};
}

Json to_json(const InstructionPair& pair) {
    Json j;
    j["prompt"] = pair.prompt;
    j["subgroup"] = std::string(pair.subgroup.name());
    j["dimension"] = std::string(to_string(pair.dimension()));
    j["source"] = pair.source;
    return j;
}

InstructionPair pair_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("prompt") || !j.contains("subgroup")) {
        throw Error(ErrorCode::NoPairFound, "object lacks prompt/subgroup");
    }
    const auto subgroup_text = j.at("subgroup").get<std::string>();
    Subgroup subgroup = j.contains("dimension") && j.at("dimension").is_string()
                            ? validate_subgroup(parse_dimension(j.at("dimension").get<std::string>()), subgroup_text)
                            : resolve_subgroup(subgroup_text);
    std::string source = j.contains("source") && j.at("source").is_string() ? j.at("source").get<std::string>()
                                                                             : std::string(kUserTextSource);
    return make_pair(j.at("prompt").get<std::string>(), subgroup, std::move(source));
}

std::string serialize(const InstructionPair& pair) { return to_json(pair).dump(); }

namespace {

// Offset one past the '}' matching the '{' at `open`, honouring quotes.
std::optional<std::size_t> matching_brace(std::string_view text, std::size_t open) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (quote != 0) {
            if (c == '\\') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
            continue;
        }
        if (c == '"') {
            quote = c;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::nullopt;
}

std::optional<std::pair<std::string, std::string>> pair_fields_from_json(std::string_view candidate) {
    auto j = Json::parse(candidate, nullptr, /*allow_exceptions=*/false);
    if (!j.is_object()) return std::nullopt;
    std::optional<std::string> prompt;
    std::optional<std::string> subgroup;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto key = lower(it.key());
        if (key == "prompt" && it.value().is_string()) prompt = it.value().get<std::string>();
        if (key == "subgroup" && it.value().is_string()) subgroup = it.value().get<std::string>();
    }
    if (!prompt || !subgroup) return std::nullopt;
    return std::make_pair(*prompt, *subgroup);
}

std::optional<std::pair<std::string, std::string>> pair_fields_from_brace(std::string_view candidate) {
    try {
        auto v = parse_brace(candidate);
        auto prompt = v.text_of("prompt");
        auto subgroup = v.text_of("subgroup");
        if (!prompt || !subgroup) return std::nullopt;
        return std::make_pair(*prompt, *subgroup);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

InstructionPair parse_instruction_pair(std::string_view text) {
    for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
        auto close = matching_brace(text, open);
        auto candidate = text.substr(open, close ? *close - open : std::string_view::npos);
        auto fields = pair_fields_from_json(candidate);
        if (!fields) fields = pair_fields_from_brace(candidate);
        if (!fields) continue;
        if (is_none_marker(fields->second)) break;
        return make_pair(fields->first, resolve_subgroup(fields->second));
    }
    throw Error(ErrorCode::NoPairFound, "reply contains no instruction pair");
}

// ---------------------------------------------------------------------------
// Intents

DetectionIntent validated(DetectionIntent intent) {
    intent.model = trim(intent.model);
    if (intent.model.empty()) throw Error(ErrorCode::InvalidValue, "intent has no target model");
    if (intent.requested_subgroup) {
        const auto d = intent.requested_subgroup->dimension();
        if (!intent.dimension) intent.dimension = d;
        if (*intent.dimension != d) {
            throw Error(ErrorCode::InvalidValue, "requested subgroup '" + std::string(intent.requested_subgroup->name()) +
                                                     "' is outside dimension " +
                                                     std::string(to_string(*intent.dimension)));
        }
    }
    if (intent.open_text && trim(*intent.open_text).empty()) intent.open_text.reset();
    return intent;
}

Json to_json(const DetectionIntent& intent) {
    Json j;
    j["model"] = intent.model;
    j["dimension"] = intent.dimension ? Json(std::string(to_string(*intent.dimension))) : Json(nullptr);
    j["subgroup"] = intent.requested_subgroup ? Json(std::string(intent.requested_subgroup->name())) : Json(nullptr);
    j["open_text"] = intent.open_text ? Json(*intent.open_text) : Json(nullptr);
    return j;
}

DetectionIntent intent_from_json(const Json& j) {
    DetectionIntent intent;
    intent.model = j.value("model", std::string{});
    if (j.contains("dimension") && j["dimension"].is_string()) intent.dimension = parse_dimension(j["dimension"].get<std::string>());
    if (j.contains("subgroup") && j["subgroup"].is_string()) {
        const auto name = j["subgroup"].get<std::string>();
        intent.requested_subgroup = intent.dimension ? validate_subgroup(*intent.dimension, name) : resolve_subgroup(name);
    }
    if (j.contains("open_text") && j["open_text"].is_string()) intent.open_text = j["open_text"].get<std::string>();
    return validated(std::move(intent));
}

// ---------------------------------------------------------------------------
// Tools

std::string_view display_name(ToolKind tool) {
    switch (tool) {
        case ToolKind::IntentionUnderstanding: return "Intention understanding";
        case ToolKind::InstructionRetrieval: return "Instruction Retrieval";
        case ToolKind::InstructionGeneration: return "Instruction Generation";
        case ToolKind::ImageGeneration: return "Image generation";
        case ToolKind::SubgroupDetection: return "BLIP-based detection";
        case ToolKind::StereotypeScoreCalculator: return "Stereotype Score Calculator";
    }
    return "?";
}

std::string_view enum_name(ToolKind tool) {
    switch (tool) {
        case ToolKind::IntentionUnderstanding: return "IntentionUnderstanding";
        case ToolKind::InstructionRetrieval: return "InstructionRetrieval";
        case ToolKind::InstructionGeneration: return "InstructionGeneration";
        case ToolKind::ImageGeneration: return "ImageGeneration";
        case ToolKind::SubgroupDetection: return "SubgroupDetection";
        case ToolKind::StereotypeScoreCalculator: return "StereotypeScoreCalculator";
    }
    return "?";
}

const ToolSchema& schema_of(ToolKind tool) {
    static const ToolSchema intention{{"task description"}, {}};
    static const ToolSchema retrieval{{"model", "dimension"}, {"subgroup"}};
    static const ToolSchema generation{{"text"}, {"model", "dimension"}};
    static const ToolSchema image{{"model", "instruction_pair"}, {"dimension"}};
    static const ToolSchema detection{{"image_path"}, {"dimension"}};
    static const ToolSchema score{{"label"}, {}};
    switch (tool) {
        case ToolKind::IntentionUnderstanding: return intention;
        case ToolKind::InstructionRetrieval: return retrieval;
        case ToolKind::InstructionGeneration: return generation;
        case ToolKind::ImageGeneration: return image;
        case ToolKind::SubgroupDetection: return detection;
        case ToolKind::StereotypeScoreCalculator: return score;
    }
    return score;
}

ToolKind parse_tool(std::string_view name) {
    const auto token = normalize_token(name);
    for (auto tool : kAllTools) {
        if (token == normalize_token(display_name(tool)) || token == normalize_token(enum_name(tool))) return tool;
    }
    if (token == "subgroup detection" || token == "blip detection" || token == "blip based detection" ||
        token == "clip based detection") {
        return ToolKind::SubgroupDetection;
    }
    if (token == "stereotype score calculation" || token == "score calculator") return ToolKind::StereotypeScoreCalculator;
    throw Error(ErrorCode::UnknownTool, "unknown tool '" + std::string(name) + "'");
}

namespace {

std::string canonical_key(std::string_view key) {
    auto k = lower(trim(key));
    std::replace(k.begin(), k.end(), '-', '_');
    if (k == "task" || k == "task_description" || k == "description") return "task description";
    if (k == "instrution_pair" || k == "instruction pair" || k == "instrution pair" || k == "pair") return "instruction_pair";
    if (k == "labels") return "label";
    if (k == "image path" || k == "images" || k == "path") return "image_path";
    return k;
}

}  // namespace

ToolAction make_action(ToolKind tool, BraceValue args) {
    if (!args.is_object()) throw Error(ErrorCode::ArgSchemaMismatch, "args must be an object");
    const auto& schema = schema_of(tool);
    std::vector<std::string> seen;
    std::string problems;
    for (auto& entry : args.entries) {
        entry.key = canonical_key(entry.key);
        entry.key_quoted = true;
        if (!entry.value) {
            problems += " bare element '" + entry.key + "';";
            continue;
        }
        const bool known = std::find(schema.required.begin(), schema.required.end(), entry.key) != schema.required.end() ||
                           std::find(schema.optional.begin(), schema.optional.end(), entry.key) != schema.optional.end();
        if (!known) problems += " unexpected key '" + entry.key + "';";
        if (std::find(seen.begin(), seen.end(), entry.key) != seen.end()) problems += " duplicate key '" + entry.key + "';";
        seen.push_back(entry.key);
    }
    for (const auto& key : schema.required) {
        if (std::find(seen.begin(), seen.end(), key) == seen.end()) problems += " missing key '" + key + "';";
    }
    if (!problems.empty()) {
        throw Error(ErrorCode::ArgSchemaMismatch, std::string(display_name(tool)) + ":" + problems);
    }
    return ToolAction{tool, std::move(args)};
}

Json to_json(const TrajectoryStep& step) {
    Json j;
    j["index"] = step.index;
    j["thought"] = step.thought;
    j["tool"] = std::string(display_name(step.action.tool));
    j["args"] = render(step.action.args);
    j["observation"] = render(step.observation);
    return j;
}

// ---------------------------------------------------------------------------
// Scores and reports

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Stereotyped: return "Stereotyped";
        case Verdict::NotStereotyped: return "NotStereotyped";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

Verdict parse_verdict(std::string_view text) {
    for (auto v : {Verdict::Stereotyped, Verdict::NotStereotyped, Verdict::Inconclusive}) {
        if (to_string(v) == text) return v;
    }
    throw Error(ErrorCode::InvalidValue, "unknown verdict '" + std::string(text) + "'");
}

Json label_json(const Label& label) { return label ? Json(std::string(label->name())) : Json(nullptr); }

Label label_from_json(const Json& j, std::optional<SocialDimension> dimension) {
    if (!j.is_string() || is_none_marker(j.get<std::string>())) return std::nullopt;
    const auto name = j.get<std::string>();
    return dimension ? validate_subgroup(*dimension, name) : resolve_subgroup(name);
}

}  // namespace

Json to_json(const StereotypeScore& score) {
    Json j;
    j["value"] = score.value;
    j["majority"] = label_json(score.majority);
    j["n_total"] = score.n_total;
    j["n_majority"] = score.n_majority;
    j["tied"] = score.tied;
    return j;
}

StereotypeScore score_from_json(const Json& j) {
    StereotypeScore s;
    s.value = j.at("value").get<double>();
    s.majority = label_from_json(j.at("majority"), std::nullopt);
    s.n_total = j.at("n_total").get<std::size_t>();
    s.n_majority = j.at("n_majority").get<std::size_t>();
    s.tied = j.value("tied", false);
    return s;
}

Json to_json(const LabeledImage& image) {
    Json j;
    j["image_ref"] = image.image_ref;
    j["label"] = label_json(image.label);
    j["confidence"] = image.confidence;
    return j;
}

Json to_json(const StereotypeReport& report) {
    Json j;
    j["query"] = report.query;
    j["intent"] = to_json(report.intent);
    j["pair"] = to_json(report.pair);
    j["optimized_prompt"] = report.optimized_prompt;
    j["score"] = to_json(report.score);
    j["verdict"] = std::string(to_string(report.verdict));
    j["rule"] = report.rule;
    Json labels = Json::array();
    for (const auto& l : report.labels) labels.push_back(to_json(l));
    j["labels"] = std::move(labels);
    Json steps = Json::array();
    for (const auto& s : report.trajectory) steps.push_back(to_json(s));
    j["trajectory"] = std::move(steps);
    return j;
}

StereotypeReport report_from_json(const Json& j) {
    StereotypeReport r{j.value("query", std::string{}), intent_from_json(j.at("intent")), pair_from_json(j.at("pair"))};
    r.optimized_prompt = j.value("optimized_prompt", std::string{});
    r.score = score_from_json(j.at("score"));
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    r.rule = j.value("rule", std::string{});
    for (const auto& l : j.value("labels", Json::array())) {
        r.labels.push_back(LabeledImage{l.at("image_ref").get<std::string>(),
                                        label_from_json(l.at("label"), r.pair.dimension()),
                                        l.value("confidence", 1.0)});
    }
    for (const auto& s : j.value("trajectory", Json::array())) {
        TrajectoryStep step;
        step.index = s.at("index").get<int>();
        step.thought = s.value("thought", std::string{});
        step.action = make_action(parse_tool(s.at("tool").get<std::string>()), parse_brace(s.at("args").get<std::string>()));
        step.observation = parse_brace(s.at("observation").get<std::string>());
        r.trajectory.push_back(std::move(step));
    }
    return r;
}

}  // namespace stereo
