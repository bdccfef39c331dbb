#pragma once

#include <string>
#include <string_view>

namespace stereo::base64 {

std::string encode(std::string_view bytes);
/// Ignores whitespace and '=' padding. Throws Error(BadResponse) on
/// characters outside the alphabet.
std::string decode(std::string_view text);

}  // namespace stereo::base64
