#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stereo {

struct BraceEntry;

/// A value in the loose `{'key': 'value', ...}` notation used for tool
/// arguments and observations. Scalars remember whether they were quoted so
/// that rendering reproduces the source form (`{Score: 0.900}` stays bare).
struct BraceValue {
    enum class Kind { Scalar, Object };

    Kind kind = Kind::Scalar;
    std::string text;
    bool quoted = true;
    std::vector<BraceEntry> entries;

    static BraceValue scalar(std::string text, bool quoted = true);
    static BraceValue bare(std::string text) { return scalar(std::move(text), false); }
    static BraceValue object(std::vector<BraceEntry> entries = {});

    bool is_object() const noexcept { return kind == Kind::Object; }

    /// Case-insensitive key lookup on an object; nullptr if absent or if this
    /// is a scalar or the entry is a bare set element.
    const BraceValue* find(std::string_view key) const;
    std::optional<std::string> text_of(std::string_view key) const;

    BraceValue& add(std::string key, BraceValue value, bool key_quoted = true);
    BraceValue& add_element(std::string element, bool quoted = true);

    friend bool operator==(const BraceValue&, const BraceValue&);
};

struct BraceEntry {
    std::string key;
    bool key_quoted = true;
    /// Set elements (`{'image_1.jpg', 'image_2.jpg'}`) carry no value.
    std::optional<BraceValue> value;

    friend bool operator==(const BraceEntry&, const BraceEntry&) = default;
};

std::string render(const BraceValue& value);

/// Parses one object starting at the first '{' in `text`. Accepts single,
/// double and backtick quotes, bare tokens, trailing commas and `...`
/// elements. `consumed` receives the offset just past the closing brace.
/// Throws Error(MalformedStep) on unbalanced input.
BraceValue parse_brace(std::string_view text, std::size_t* consumed = nullptr);

}  // namespace stereo
