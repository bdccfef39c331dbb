#include "stereo/prompt_text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <vector>

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

std::string collapse_spaces(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\''; }

// Longest spellings first so "middle easterns" is consumed before "middle eastern".
const std::vector<std::string>& mention_words() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w;
        for (auto g : all_subgroups()) {
            w.emplace_back(g.name());
            w.push_back(std::string(g.name()) + "s");
        }
        for (const char* extra : {"jewish", "jewess", "afrcian", "afrcians", "middleeastern", "middle-eastern",
                                  "middle-easterns", "mid eastern", "latina", "latinas", "latinx"}) {
            w.emplace_back(extra);
        }
        std::sort(w.begin(), w.end(), [](const auto& a, const auto& b) {
            return a.size() != b.size() ? a.size() > b.size() : a < b;
        });
        return w;
    }();
    return words;
}

/// Position of the first whole-word occurrence of any mention word, and
/// its length.
std::pair<std::size_t, std::size_t> find_mention(const std::string& lowered, std::size_t from) {
    std::size_t best = std::string::npos, best_len = 0;
    for (const auto& w : mention_words()) {
        for (auto pos = lowered.find(w, from); pos != std::string::npos; pos = lowered.find(w, pos + 1)) {
            const bool left = pos == 0 || !is_word_char(lowered[pos - 1]);
            const auto end = pos + w.size();
            const bool right = end == lowered.size() || !is_word_char(lowered[end]);
            if (left && right) {
                if (pos < best || (pos == best && w.size() > best_len)) {
                    best = pos;
                    best_len = w.size();
                }
                break;
            }
        }
    }
    return {best, best_len};
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
    return text.size() >= prefix.size() && lower(text.substr(0, prefix.size())) == prefix;
}

bool starts_with_verb(std::string_view rest) {
    static constexpr std::string_view verbs[] = {
        "is",    "are",   "was",   "were",  "be",     "have",  "has",    "had",    "do",    "does",   "did",
        "can",   "could", "will",  "would", "should", "must",  "never",  "always", "often", "cannot", "love",
        "loves", "like",  "likes", "hate",  "hates",  "steal", "steals", "eat",    "eats",  "work",   "works",
        "live",  "lives", "wear",  "wears", "own",    "owns",  "run",    "runs",   "look",  "looks",  "act",
        "worship", "worships", "pray", "prays"};
    const auto word = lower(rest.substr(0, rest.find(' ')));
    return std::find(std::begin(verbs), std::end(verbs), word) != std::end(verbs);
}

std::string strip_emphasis(std::string_view text) {
    auto t = trim(text);
    if (t.size() >= kPersonEmphasis.size() && t.compare(t.size() - kPersonEmphasis.size(), std::string::npos,
                                                         kPersonEmphasis) == 0) {
        t = trim(std::string_view(t).substr(0, t.size() - kPersonEmphasis.size()));
        if (!t.empty() && t.back() == ',') t.pop_back();
    }
    return trim(t);
}

}  // namespace

std::string strip_subgroup_mentions(std::string_view text) {
    std::string s(text);
    for (;;) {
        const auto [pos, len] = find_mention(lower(s), 0);
        if (pos == std::string::npos) break;
        s.erase(pos, len);
    }
    return collapse_spaces(s);
}

bool mentions_subgroup(std::string_view text) { return find_mention(lower(text), 0).first != std::string::npos; }

std::string people_rest(std::string_view prompt) {
    auto t = strip_emphasis(prompt);
    while (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?')) t.pop_back();
    t = strip_subgroup_mentions(t);

    std::string rest;
    bool glued = true;
    if (starts_with_ci(t, "the people who ")) {
        rest = t.substr(15);
    } else if (starts_with_ci(t, "people who ")) {
        rest = t.substr(11);
    } else if (starts_with_ci(t, "people that ")) {
        rest = t.substr(12);
    } else if (starts_with_ci(t, "the people with ")) {
        rest = "have " + t.substr(16);
    } else if (starts_with_ci(t, "people with ")) {
        rest = "have " + t.substr(12);
    } else {
        rest = t;
        glued = false;
    }
    rest = trim(rest);
    if (!glued) {
        if (starts_with_ci(rest, "with ")) {
            rest = "have " + rest.substr(5);
        } else if (!rest.empty() && !starts_with_verb(rest)) {
            rest = "are " + rest;
        }
    }
    // A description that was nothing but a subgroup name leaves no trait.
    if (rest.empty() || lower(rest) == "are" || lower(rest) == "is" || lower(rest) == "have") rest = "are people";
    return rest;
}

std::string people_form(std::string_view prompt) { return "people who " + people_rest(prompt); }

std::string prompt_optimize(std::string_view prompt) {
    return "The people who " + people_rest(prompt) + ", " + std::string(kPersonEmphasis);
}

std::string prompt_optimize(const InstructionPair& pair) { return prompt_optimize(pair.prompt); }

}  // namespace stereo
