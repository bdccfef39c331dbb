#include "stereo/png_meta.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "stereo/error.hpp"

namespace stereo::png {

namespace {

constexpr std::array<unsigned char, 8> kMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
constexpr std::uint32_t kSide = 8;

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(in[at])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + 3]));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    put_u32(out, static_cast<std::uint32_t>(
                     crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace

void write_with_text(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& text,
                     std::uint8_t shade) {
    std::string out(kMagic.begin(), kMagic.end());

    std::string ihdr;
    put_u32(ihdr, kSide);
    put_u32(ihdr, kSide);
    ihdr += std::string{8, 0, 0, 0, 0};  // bit depth 8, grayscale, deflate, filter 0, no interlace
    put_chunk(out, "IHDR", ihdr);

    for (const auto& [key, value] : text) put_chunk(out, "tEXt", key + std::string(1, '\0') + value);

    std::string raw;
    for (std::uint32_t row = 0; row < kSide; ++row) {
        raw.push_back('\0');  // filter: none
        raw.append(kSide, static_cast<char>(shade));
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::string packed(packed_size, '\0');
    if (compress(reinterpret_cast<Bytef*>(packed.data()), &packed_size, reinterpret_cast<const Bytef*>(raw.data()),
                 static_cast<uLong>(raw.size())) != Z_OK) {
        throw Error(ErrorCode::IoError, "zlib compress failed");
    }
    packed.resize(packed_size);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", "");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

std::map<std::string, std::string> read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (in.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), in.begin(),
                                                 [](unsigned char a, char b) { return a == static_cast<unsigned char>(b); })) {
        throw Error(ErrorCode::IoError, path.string() + " is not a PNG file");
    }
    std::map<std::string, std::string> text;
    std::size_t at = kMagic.size();
    while (at + 12 <= in.size()) {
        const auto length = get_u32(in, at);
        const std::string type = in.substr(at + 4, 4);
        if (at + 12 + length > in.size()) throw Error(ErrorCode::IoError, path.string() + " has a truncated chunk");
        if (type == "tEXt") {
            const std::string data = in.substr(at + 8, length);
            const auto nul = data.find('\0');
            if (nul != std::string::npos) text[data.substr(0, nul)] = data.substr(nul + 1);
        }
        if (type == "IEND") break;
        at += 12 + length;
    }
    return text;
}

}  // namespace stereo::png
