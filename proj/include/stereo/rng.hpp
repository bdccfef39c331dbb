#pragma once

#include <cstdint>
#include <string_view>

namespace stereo {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Identifies one counter-based stream. Draw i of a stream is a pure
/// function of (key, i), so any partition of the index range across
/// threads sees the same numbers.
struct StreamKey {
    std::uint64_t a = 0;
    std::uint64_t b = 0;

    constexpr StreamKey() = default;
    constexpr StreamKey(std::uint64_t first, std::uint64_t second) : a(mix64(first)), b(mix64(second ^ 0x5851f42d4c957f2dULL)) {}

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix64(a ^ mix64(b + mix64(counter)));
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    constexpr double uniform(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }
};

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    return mix64(seed ^ mix64(salt));
}

}  // namespace stereo
