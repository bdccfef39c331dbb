#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stereo/kernels.hpp"

namespace stereo::kernels {

namespace {

inline std::uint32_t pick(const double* row, std::size_t width, double u) {
    const auto* it = std::upper_bound(row, row + width, u);
    auto idx = static_cast<std::size_t>(it - row);
    return static_cast<std::uint32_t>(std::min(idx, width - 1));
}

}  // namespace

void sample_rows_parallel(const CdfTable& table, std::span<const std::uint32_t> rows_of, StreamKey key,
                          std::uint64_t first, std::span<std::uint32_t> out) {
    const auto n = static_cast<std::int64_t>(out.size());
    const double* base = table.cdf.data();
    const std::size_t width = table.width;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        out[u] = pick(base + rows_of[u] * width, width, key.uniform(first + u));
    }
}

void sample_uniform_row_parallel(const CdfTable& table, StreamKey key, std::uint64_t first,
                                 std::span<std::uint32_t> out) {
    const auto n = static_cast<std::int64_t>(out.size());
    const double* row = table.cdf.data();
    const std::size_t width = table.width;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        out[u] = pick(row, width, key.uniform(first + u));
    }
}

std::vector<std::size_t> count_codes_parallel(std::span<const std::uint32_t> codes, std::size_t categories) {
    std::vector<std::size_t> counts(categories, 0);
    const auto n = static_cast<std::int64_t>(codes.size());
#pragma omp parallel
    {
        std::vector<std::size_t> local(categories, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const auto c = codes[static_cast<std::size_t>(i)];
            if (c < categories) ++local[c];
        }
#pragma omp critical(stereo_count_codes)
        for (std::size_t c = 0; c < categories; ++c) counts[c] += local[c];
    }
    return counts;
}

std::vector<std::size_t> matches_per_category_parallel(std::span<const std::uint32_t> truth,
                                                       std::span<const std::uint32_t> predicted,
                                                       std::size_t categories) {
    std::vector<std::size_t> hits(categories, 0);
    const auto n = static_cast<std::int64_t>(truth.size());
#pragma omp parallel
    {
        std::vector<std::size_t> local(categories, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            if (truth[u] < categories && truth[u] == predicted[u]) ++local[truth[u]];
        }
#pragma omp critical(stereo_matches)
        for (std::size_t c = 0; c < categories; ++c) hits[c] += local[c];
    }
    return hits;
}

}  // namespace stereo::kernels
