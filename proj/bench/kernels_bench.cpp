// Serial against OpenMP variants of the sampling and counting kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "stereo/kernels.hpp"

using namespace stereo;

namespace {

kernels::CdfTable race_table() {
    kernels::CdfTable t;
    t.width = 6;
    for (int r = 0; r < 6; ++r) {
        std::vector<double> p(6, 0.05);
        p[r] = 0.75;
        t.add_row(p);
    }
    return t;
}

std::vector<std::uint32_t> row_indices(std::size_t n) {
    std::vector<std::uint32_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i % 6);
    return rows;
}

template <auto Kernel>
void BM_SampleRows(benchmark::State& state) {
    const auto table = race_table();
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto rows = row_indices(n);
    std::vector<std::uint32_t> out(n);
    const StreamKey key(1, 2);
    for (auto _ : state) {
        Kernel(table, rows, key, 0, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <auto Kernel>
void BM_CountCodes(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto codes = row_indices(n);
    for (auto _ : state) {
        auto counts = Kernel(codes, 7);
        benchmark::DoNotOptimize(counts.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

}  // namespace

BENCHMARK(BM_SampleRows<kernels::sample_rows_serial>)->Name("sample_rows/serial")->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_SampleRows<kernels::sample_rows_parallel>)->Name("sample_rows/parallel")->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_CountCodes<kernels::count_codes_serial>)->Name("count_codes/serial")->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_CountCodes<kernels::count_codes_parallel>)->Name("count_codes/parallel")->RangeMultiplier(16)->Range(1 << 10, 1 << 22);

BENCHMARK_MAIN();
