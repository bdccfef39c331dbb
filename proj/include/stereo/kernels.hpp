#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stereo/rng.hpp"

namespace stereo::kernels {

/// Flattened cumulative distributions: row r occupies
/// cdf[r * width, (r + 1) * width), last entry of each row is 1.
struct CdfTable {
    std::size_t width = 0;
    std::vector<double> cdf;

    std::size_t rows() const noexcept { return width == 0 ? 0 : cdf.size() / width; }
    void add_row(std::span<const double> probabilities);
};

/// out[i] = category drawn from row `rows_of[i]` using draw `first + i` of
/// `key`. Results are independent of thread count.
void sample_rows_serial(const CdfTable& table, std::span<const std::uint32_t> rows_of, StreamKey key,
                        std::uint64_t first, std::span<std::uint32_t> out);
void sample_rows_parallel(const CdfTable& table, std::span<const std::uint32_t> rows_of, StreamKey key,
                          std::uint64_t first, std::span<std::uint32_t> out);

/// Same as above with every draw from row 0.
void sample_uniform_row_serial(const CdfTable& table, StreamKey key, std::uint64_t first, std::span<std::uint32_t> out);
void sample_uniform_row_parallel(const CdfTable& table, StreamKey key, std::uint64_t first,
                                 std::span<std::uint32_t> out);

/// Histogram of `codes` over [0, categories). Codes >= categories are ignored.
std::vector<std::size_t> count_codes_serial(std::span<const std::uint32_t> codes, std::size_t categories);
std::vector<std::size_t> count_codes_parallel(std::span<const std::uint32_t> codes, std::size_t categories);

/// Number of positions where a[i] == b[i], per category of `a`.
std::vector<std::size_t> matches_per_category_serial(std::span<const std::uint32_t> truth,
                                                     std::span<const std::uint32_t> predicted,
                                                     std::size_t categories);
std::vector<std::size_t> matches_per_category_parallel(std::span<const std::uint32_t> truth,
                                                       std::span<const std::uint32_t> predicted,
                                                       std::size_t categories);

/// Below this size the dispatchers stay serial.
inline constexpr std::size_t kParallelThreshold = 4096;

void sample_rows(const CdfTable& table, std::span<const std::uint32_t> rows_of, StreamKey key, std::uint64_t first,
                 std::span<std::uint32_t> out);
void sample_uniform_row(const CdfTable& table, StreamKey key, std::uint64_t first, std::span<std::uint32_t> out);
std::vector<std::size_t> count_codes(std::span<const std::uint32_t> codes, std::size_t categories);
std::vector<std::size_t> matches_per_category(std::span<const std::uint32_t> truth,
                                              std::span<const std::uint32_t> predicted, std::size_t categories);

}  // namespace stereo::kernels
