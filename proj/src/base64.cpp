#include "stereo/base64.hpp"

#include <algorithm>
#include <cctype>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "stereo/error.hpp"

namespace stereo::base64 {

namespace it = boost::archive::iterators;

std::string encode(std::string_view bytes) {
    using Encoder = it::base64_from_binary<it::transform_width<std::string_view::const_iterator, 6, 8>>;
    std::string out(Encoder(bytes.begin()), Encoder(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::string decode(std::string_view text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '=') continue;
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '/') {
            throw Error(ErrorCode::BadResponse, "invalid base64 character");
        }
        clean.push_back(c);
    }
    if (clean.size() % 4 == 1) throw Error(ErrorCode::BadResponse, "truncated base64 payload");
    const std::size_t bytes = clean.size() * 3 / 4;
    clean.append((4 - clean.size() % 4) % 4, 'A');
    using Decoder = it::transform_width<it::binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::string out(Decoder(clean.begin()), Decoder(clean.end()));
    out.resize(bytes);
    return out;
}

}  // namespace stereo::base64
