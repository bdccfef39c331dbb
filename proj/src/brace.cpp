#include "stereo/brace.hpp"

#include <cctype>

#include "stereo/error.hpp"

namespace stereo {

BraceValue BraceValue::scalar(std::string text, bool quoted) {
    BraceValue v;
    v.kind = Kind::Scalar;
    v.text = std::move(text);
    v.quoted = quoted;
    return v;
}

BraceValue BraceValue::object(std::vector<BraceEntry> entries) {
    BraceValue v;
    v.kind = Kind::Object;
    v.entries = std::move(entries);
    return v;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

}  // namespace

const BraceValue* BraceValue::find(std::string_view key) const {
    if (!is_object()) return nullptr;
    for (const auto& e : entries) {
        if (e.value && iequals(e.key, key)) return &*e.value;
    }
    return nullptr;
}

std::optional<std::string> BraceValue::text_of(std::string_view key) const {
    const auto* v = find(key);
    if (v == nullptr || v->is_object()) return std::nullopt;
    return v->text;
}

BraceValue& BraceValue::add(std::string key, BraceValue value, bool key_quoted) {
    kind = Kind::Object;
    entries.push_back(BraceEntry{std::move(key), key_quoted, std::move(value)});
    return *this;
}

BraceValue& BraceValue::add_element(std::string element, bool quoted) {
    kind = Kind::Object;
    entries.push_back(BraceEntry{std::move(element), quoted, std::nullopt});
    return *this;
}

bool operator==(const BraceValue& a, const BraceValue& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == BraceValue::Kind::Scalar) return a.text == b.text && a.quoted == b.quoted;
    return a.entries == b.entries;
}

namespace {

std::string quote(const std::string& text) {
    const bool has_single = text.find('\'') != std::string::npos;
    const bool has_double = text.find('"') != std::string::npos;
    const char q = (has_single && !has_double) ? '"' : '\'';
    std::string out(1, q);
    for (char c : text) {
        if (c == q || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back(q);
    return out;
}

void render_into(const BraceValue& v, std::string& out) {
    if (!v.is_object()) {
        out += v.quoted ? quote(v.text) : v.text;
        return;
    }
    out.push_back('{');
    bool first = true;
    for (const auto& e : v.entries) {
        if (!first) out += ", ";
        first = false;
        out += e.key_quoted ? quote(e.key) : e.key;
        if (e.value) {
            out += ": ";
            render_into(*e.value, out);
        }
    }
    out.push_back('}');
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    BraceValue parse_top(std::size_t* consumed) {
        pos_ = s_.find('{');
        if (pos_ == std::string_view::npos) fail("no '{' found");
        auto v = parse_object();
        if (consumed != nullptr) *consumed = pos_;
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::MalformedStep, "args/observation: " + what + " at offset " + std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    static bool is_open_quote(char c) { return c == '\'' || c == '"' || c == '`'; }

    BraceValue parse_object() {
        ++pos_;  // '{'
        BraceValue obj = BraceValue::object();
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) fail("unterminated object");
            if (s_[pos_] == '}') {
                ++pos_;
                return obj;
            }
            if (s_[pos_] == ',') {
                ++pos_;
                continue;
            }
            auto [key, key_quoted] = parse_scalar(/*stop_at_colon=*/true);
            skip_ws();
            BraceEntry entry{std::move(key), key_quoted, std::nullopt};
            if (pos_ < s_.size() && s_[pos_] == ':') {
                ++pos_;
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == '{') {
                    entry.value = parse_object();
                } else {
                    auto [text, quoted] = parse_scalar(/*stop_at_colon=*/false);
                    entry.value = BraceValue::scalar(std::move(text), quoted);
                }
            }
            obj.entries.push_back(std::move(entry));
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != '}') fail("expected ',' or '}'");
        }
    }

    std::pair<std::string, bool> parse_scalar(bool stop_at_colon) {
        if (pos_ >= s_.size()) fail("unexpected end");
        const char c = s_[pos_];
        if (is_open_quote(c)) {
            // LaTeX-style `text' closes with an apostrophe.
            const char close = (c == '`') ? '\'' : c;
            ++pos_;
            std::string out;
            while (pos_ < s_.size() && s_[pos_] != close) {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
                out.push_back(s_[pos_++]);
            }
            if (pos_ >= s_.size()) fail("unterminated quote");
            ++pos_;
            return {std::move(out), true};
        }
        if (c == '{') fail("object where a scalar was expected");
        const std::size_t start = pos_;
        while (pos_ < s_.size()) {
            const char d = s_[pos_];
            if (d == ',' || d == '}' || d == '{' || d == '\n' || (stop_at_colon && d == ':')) break;
            ++pos_;
        }
        auto token = s_.substr(start, pos_ - start);
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) token.remove_suffix(1);
        if (token.empty()) fail("empty token");
        return {std::string(token), false};
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string render(const BraceValue& value) {
    std::string out;
    render_into(value, out);
    return out;
}

BraceValue parse_brace(std::string_view text, std::size_t* consumed) { return Parser(text).parse_top(consumed); }

}  // namespace stereo
