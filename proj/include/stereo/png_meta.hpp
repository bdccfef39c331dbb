#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace stereo::png {

/// Writes a tiny grayscale PNG whose tEXt chunks carry `text` entries.
void write_with_text(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& text,
                     std::uint8_t shade = 128);

/// Returns all tEXt chunks. Throws Error(IoError) when the file is not a PNG.
std::map<std::string, std::string> read_text(const std::filesystem::path& path);

}  // namespace stereo::png
