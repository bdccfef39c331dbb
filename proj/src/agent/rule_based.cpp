#include "stereo/agent/rule_based.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <utility>

#include "stereo/agent/planner.hpp"
#include "stereo/agent/toolbox.hpp"
#include "stereo/agent/tools.hpp"
#include "stereo/error.hpp"

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

std::string strip_punct(std::string s) {
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) && s.back() != '.' ) s.pop_back();
    while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == '!' || s.back() == '?' || s.back() == ';')) {
        s.pop_back();
    }
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
    return s;
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(strip_punct(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(strip_punct(cur));
    out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
    return out;
}

// Group words people actually write, mapped onto subgroups.
const std::vector<std::pair<std::string_view, std::string_view>>& group_words() {
    static const std::vector<std::pair<std::string_view, std::string_view>> words = {
        {"men", "male"},           {"man", "male"},           {"males", "male"},         {"male", "male"},
        {"guys", "male"},          {"boys", "male"},          {"women", "female"},       {"woman", "female"},
        {"females", "female"},     {"female", "female"},      {"girls", "female"},       {"black", "african"},
        {"blacks", "african"},     {"africans", "african"},   {"african", "african"},    {"white", "european"},
        {"whites", "european"},    {"europeans", "european"}, {"european", "european"},  {"caucasian", "european"},
        {"asians", "asian"},       {"asian", "asian"},        {"chinese", "asian"},      {"latinos", "latino"},
        {"latino", "latino"},      {"latinas", "latino"},     {"latina", "latino"},      {"hispanic", "latino"},
        {"hispanics", "latino"},   {"mexicans", "latino"},    {"mexican", "latino"},     {"arabs", "middle eastern"},
        {"arab", "middle eastern"}, {"christians", "christian"}, {"christian", "christian"}, {"muslims", "muslim"},
        {"muslim", "muslim"},      {"islam", "muslim"},       {"buddhists", "buddhist"}, {"buddhist", "buddhist"},
        {"hindus", "hindu"},       {"hindu", "hindu"},        {"catholics", "catholic"}, {"catholic", "catholic"},
        {"jews", "jew"},           {"jew", "jew"},            {"jewish", "jew"},
    };
    return words;
}

/// Subgroup named by words[i] (or words[i..i+1] for "middle eastern").
std::optional<std::pair<Subgroup, std::size_t>> group_at(const std::vector<std::string>& words, std::size_t i) {
    if (i + 1 < words.size()) {
        const auto two = lower(words[i]) + " " + lower(words[i + 1]);
        if (two == "middle eastern" || two == "middle easterners") return std::pair{resolve_subgroup("middle eastern"), 2};
    }
    const auto w = lower(words[i]);
    for (const auto& [word, name] : group_words()) {
        if (w == word) return std::pair{resolve_subgroup(name), std::size_t{1}};
    }
    return std::nullopt;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to && i < words.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += words[i];
    }
    return out;
}

/// Leading "the", "these", "all" and similar words carry nothing.
std::size_t skip_fillers(const std::vector<std::string>& words, std::size_t i) {
    static const std::array<std::string_view, 8> fillers = {"the", "these", "those", "all", "most", "some", "many", "every"};
    while (i < words.size() && std::find(fillers.begin(), fillers.end(), lower(words[i])) != fillers.end()) ++i;
    return i;
}

/// First clause of the text (up to . ! ? ; or a comma followed by "which").
std::string first_clause(std::string_view text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.' || c == '!' || c == '?' || c == ';' || c == ',') break;
        out.push_back(c);
    }
    return out;
}

struct Quoted {
    std::string text;
    std::string rest;  // the query with the quoted part removed
};

std::optional<Quoted> find_quoted(std::string_view q) {
    static const std::array<std::pair<std::string_view, std::string_view>, 3> quotes = {
        {{"\"", "\""}, {"\xe2\x80\x9c", "\xe2\x80\x9d"}, {"'", "'"}}};
    for (const auto& [open, close] : quotes) {
        auto a = q.find(open);
        while (a != std::string_view::npos) {
            // An apostrophe inside a word is not a quote.
            if (open == "'" && a > 0 && std::isalpha(static_cast<unsigned char>(q[a - 1]))) {
                a = q.find(open, a + 1);
                continue;
            }
            const auto b = q.find(close, a + open.size());
            if (b == std::string_view::npos) break;
            auto inner = trim(q.substr(a + open.size(), b - a - open.size()));
            if (inner.size() >= 8 && inner.find(' ') != std::string::npos) {
                return Quoted{inner, std::string(q.substr(0, a)) + " " + std::string(q.substr(b + close.size()))};
            }
            a = q.find(open, b + close.size());
        }
    }
    return std::nullopt;
}

std::optional<SocialDimension> dimension_word(const std::vector<std::string>& words) {
    for (const auto& w0 : words) {
        const auto w = lower(w0);
        if (w == "gender" || w == "gendered" || w == "sex" || w == "sexist" || w == "sexism") return SocialDimension::Gender;
        if (w == "race" || w == "racial" || w == "racially" || w == "racist" || w == "racism" || w == "ethnic" ||
            w == "ethnicity" || w == "races") {
            return SocialDimension::Race;
        }
        if (w == "religion" || w == "religious" || w == "religiously" || w == "religions" || w == "faith") {
            return SocialDimension::Religion;
        }
    }
    return std::nullopt;
}

std::optional<std::string> model_mention(const std::vector<std::string>& words) {
    const auto known = known_models();
    auto is_known = [&](const std::string& id) { return std::find(known.begin(), known.end(), id) != known.end(); };
    for (std::size_t len : {3u, 2u, 1u}) {
        for (std::size_t i = 0; i + len <= words.size(); ++i) {
            const auto candidate = join(words, i, i + len);
            const auto id = canonical_model_id(candidate);
            // "sd" alone is too short to trust unless followed by "model".
            if (is_known(id) && !(len == 1 && lower(candidate) == "mj")) return id;
        }
    }
    static const std::array<std::string_view, 12> not_models = {"the", "this", "a", "that", "image", "text-to-image",
                                                                "which", "diffusion", "generation", "your", "any", "an"};
    for (std::size_t i = 1; i < words.size(); ++i) {
        if (lower(words[i]) == "model" || lower(words[i]) == "models") {
            const auto w = lower(words[i - 1]);
            if (std::find(not_models.begin(), not_models.end(), w) == not_models.end()) return words[i - 1];
        }
    }
    return std::nullopt;
}

std::optional<Subgroup> subgroup_mention(const std::vector<std::string>& words) {
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (auto g = group_at(words, i)) return g->first;
    }
    return std::nullopt;
}

std::string pair_reply(const InstructionPair& p) {
    Json j;
    j["prompt"] = p.prompt;
    j["subgroup"] = p.subgroup.display_name();
    return j.dump();
}

std::string intent_reply(const DetectionIntent& intent) {
    Json j;
    j["model"] = intent.model;
    j["dimension"] = intent.dimension ? Json(std::string(to_string(*intent.dimension))) : Json(nullptr);
    j["subgroup"] = intent.requested_subgroup ? Json(std::string(intent.requested_subgroup->name())) : Json(nullptr);
    j["text"] = intent.open_text ? Json(*intent.open_text) : Json(nullptr);
    return j.dump();
}

// ---------------------------------------------------------------------------
// Planning

std::string next_step(std::span<const ChatMessage> messages) {
    std::string query;
    std::map<int, BraceValue> obs;
    static const std::regex obs_re(R"(^Obs (\d+): )");
    for (const auto& m : messages) {
        if (m.role != "user") continue;
        if (m.content.rfind("Task specific: ", 0) == 0) {
            query = m.content.substr(15);
            continue;
        }
        std::smatch match;
        if (std::regex_search(m.content, match, obs_re)) {
            obs[std::stoi(match[1].str())] = parse_brace(m.content.substr(match.length(0)));
        }
    }
    const int k = obs.empty() ? 1 : obs.rbegin()->first + 1;

    auto args = BraceValue::object();
    std::string thought;
    ToolKind tool = ToolKind::IntentionUnderstanding;
    auto intent = obs.count(1) ? std::optional(intent_from_observation(obs.at(1))) : std::nullopt;
    auto model_text = [&] {
        if (obs.count(1)) {
            if (auto m = obs.at(1).text_of("model")) return *m;
        }
        return std::string(kDefaultTarget);
    };

    if (k == 1) {
        thought = "First work out which model, dimension and text the request is about.";
        args.add("task description", BraceValue::scalar(query));
    } else if (k == 2) {
        if (intent && intent->open_text) {
            tool = ToolKind::InstructionGeneration;
            thought = "The request quotes text, so extract an instruction pair from it.";
            args.add("text", BraceValue::scalar(*intent->open_text));
        } else {
            tool = ToolKind::InstructionRetrieval;
            thought = "With the model and dimension known, look up instruction pairs in the dataset.";
            args.add("model", BraceValue::scalar(model_text()));
            args.add("dimension", BraceValue::scalar(intent && intent->dimension ? std::string(to_string(*intent->dimension))
                                                                                 : std::string("any")));
            if (intent && intent->requested_subgroup) {
                args.add("subgroup", BraceValue::scalar(intent->requested_subgroup->display_name()));
            }
        }
    } else if (k == 3) {
        tool = ToolKind::ImageGeneration;
        thought = "Generate images for the instruction pair with the target model.";
        args.add("model", BraceValue::scalar(model_text()));
        args.add("instruction_pair", obs.count(2) ? obs.at(2) : BraceValue::object());
    } else if (k == 4) {
        tool = ToolKind::SubgroupDetection;
        thought = "Classify every generated image into a subgroup.";
        args.add("image_path", BraceValue::scalar("./"));
        if (obs.count(2)) {
            if (auto s = obs.at(2).text_of("subgroup")) {
                args.add("dimension", BraceValue::scalar(std::string(to_string(resolve_subgroup(*s).dimension()))));
            }
        }
    } else {
        tool = ToolKind::StereotypeScoreCalculator;
        thought = "Compute the stereotype score from the labels.";
        args.add("label", obs.count(4) ? obs.at(4) : BraceValue::object());
    }
    return render_thought_action(k, thought, make_action(tool, std::move(args)));
}

}  // namespace

DetectionIntent heuristic_intent(std::string_view query, std::string_view default_model) {
    DetectionIntent intent;
    std::string scan(query);
    if (auto q = find_quoted(query)) {
        intent.open_text = q->text;
        scan = q->rest;
    }
    const auto words = words_of(scan);
    intent.model = canonical_model_id(model_mention(words).value_or(std::string(default_model)));
    intent.dimension = dimension_word(words);
    if (!intent.open_text) {
        // "towards Asian", "against Muslims", or any group word.
        intent.requested_subgroup = subgroup_mention(words);
        if (intent.requested_subgroup && intent.dimension && intent.requested_subgroup->dimension() != *intent.dimension) {
            intent.requested_subgroup.reset();
        }
    }
    if (!intent.dimension && intent.requested_subgroup) intent.dimension = intent.requested_subgroup->dimension();
    if (!intent.dimension && intent.open_text) {
        if (auto p = heuristic_pair(*intent.open_text)) intent.dimension = p->dimension();
    }
    return validated(std::move(intent));
}

std::optional<InstructionPair> heuristic_pair(std::string_view text) {
    const auto words = words_of(first_clause(text));
    if (words.empty()) return std::nullopt;
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto g = group_at(words, i);
        if (!g) continue;
        const auto [group, len] = *g;
        const auto after = i + len;
        auto w = [&](std::size_t j) { return j < words.size() ? lower(words[j]) : std::string{}; };

        // "<np> are (all) <group>"
        if (i >= 2 && (w(i - 1) == "are" || (w(i - 1) == "all" && i >= 3 && w(i - 2) == "are"))) {
            const auto verb = w(i - 1) == "are" ? i - 1 : i - 2;
            const auto start = skip_fillers(words, 0);
            if (start < verb) return make_pair("People who are " + join(words, start, verb), group);
        }
        // "this <group> <np>" / "a <group> <np>"
        if (i >= 1 && (w(i - 1) == "this" || w(i - 1) == "a" || w(i - 1) == "that") && after < words.size()) {
            return make_pair("people who is a " + join(words, after, words.size()), group);
        }
        // "<group> are (all) <trait>" / "<group> have <np>" / "<group> always <verb> ..."
        // "Asians all have ..." reads like "Asians have ...".
        const auto verb_at = w(after) == "all" ? after + 1 : after;
        if (verb_at < words.size()) {
            const auto v = w(verb_at);
            auto rest_from = [&](std::size_t j) { return join(words, skip_fillers(words, j), words.size()); };
            if ((v == "are" || v == "were") && verb_at + 1 < words.size()) {
                auto trait = rest_from(verb_at + 1);
                if (!trait.empty()) return make_pair("People who are " + trait, group);
            }
            if ((v == "have" || v == "has") && verb_at + 1 < words.size()) {
                return make_pair("People who have " + rest_from(verb_at + 1), group);
            }
            static const std::set<std::string> plain_verbs = {"worship", "eat",  "steal", "hate", "love",
                                                              "pray",    "wear", "smell", "own",  "drink"};
            if (v == "always" || v == "never" || v == "can't" || v == "cannot" || v == "should" ||
                plain_verbs.count(v)) {
                return make_pair("People who " + join(words, verb_at, words.size()), group);
            }
        }
    }
    return std::nullopt;
}

RuleBasedProvider::RuleBasedProvider(std::string default_model) : default_model_(std::move(default_model)) {}

std::string RuleBasedProvider::complete(std::string_view system, std::span<const ChatMessage> messages) {
    if (messages.empty()) throw Error(ErrorCode::PreconditionViolated, "chat request needs at least one message");
    if (system == intent_system_prompt()) {
        try {
            return intent_reply(heuristic_intent(messages.front().content, default_model_));
        } catch (const Error&) {
            return "None";
        }
    }
    if (system == instruction_system_prompt()) {
        auto pair = heuristic_pair(messages.front().content);
        return pair ? pair_reply(*pair) : std::string("None");
    }
    return next_step(messages);
}

}  // namespace stereo
