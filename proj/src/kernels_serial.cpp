#include <algorithm>
#include <stdexcept>

#include "stereo/kernels.hpp"

namespace stereo::kernels {

void CdfTable::add_row(std::span<const double> probabilities) {
    if (width == 0) width = probabilities.size();
    if (probabilities.size() != width) throw std::invalid_argument("CdfTable row width mismatch");
    double acc = 0.0;
    for (double p : probabilities) {
        acc += p;
        cdf.push_back(acc);
    }
    // Guard against round-off leaving u in (acc, 1).
    cdf.back() = 1.0;
}

namespace detail {

inline std::uint32_t pick(const double* row, std::size_t width, double u) {
    const auto* it = std::upper_bound(row, row + width, u);
    auto idx = static_cast<std::size_t>(it - row);
    return static_cast<std::uint32_t>(std::min(idx, width - 1));
}

}  // namespace detail

void sample_rows_serial(const CdfTable& table, std::span<const std::uint32_t> rows_of, StreamKey key,
                        std::uint64_t first, std::span<std::uint32_t> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double* row = table.cdf.data() + rows_of[i] * table.width;
        out[i] = detail::pick(row, table.width, key.uniform(first + i));
    }
}

void sample_uniform_row_serial(const CdfTable& table, StreamKey key, std::uint64_t first, std::span<std::uint32_t> out) {
    const double* row = table.cdf.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::pick(row, table.width, key.uniform(first + i));
}

std::vector<std::size_t> count_codes_serial(std::span<const std::uint32_t> codes, std::size_t categories) {
    std::vector<std::size_t> counts(categories, 0);
    for (auto c : codes) {
        if (c < categories) ++counts[c];
    }
    return counts;
}

std::vector<std::size_t> matches_per_category_serial(std::span<const std::uint32_t> truth,
                                                     std::span<const std::uint32_t> predicted,
                                                     std::size_t categories) {
    std::vector<std::size_t> hits(categories, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < categories && truth[i] == predicted[i]) ++hits[truth[i]];
    }
    return hits;
}

void sample_rows(const CdfTable& table, std::span<const std::uint32_t> rows_of, StreamKey key, std::uint64_t first,
                 std::span<std::uint32_t> out) {
    if (out.size() < kParallelThreshold) return sample_rows_serial(table, rows_of, key, first, out);
    sample_rows_parallel(table, rows_of, key, first, out);
}

void sample_uniform_row(const CdfTable& table, StreamKey key, std::uint64_t first, std::span<std::uint32_t> out) {
    if (out.size() < kParallelThreshold) return sample_uniform_row_serial(table, key, first, out);
    sample_uniform_row_parallel(table, key, first, out);
}

std::vector<std::size_t> count_codes(std::span<const std::uint32_t> codes, std::size_t categories) {
    if (codes.size() < kParallelThreshold) return count_codes_serial(codes, categories);
    return count_codes_parallel(codes, categories);
}

std::vector<std::size_t> matches_per_category(std::span<const std::uint32_t> truth,
                                              std::span<const std::uint32_t> predicted, std::size_t categories) {
    if (truth.size() < kParallelThreshold) return matches_per_category_serial(truth, predicted, categories);
    return matches_per_category_parallel(truth, predicted, categories);
}

}  // namespace stereo::kernels
