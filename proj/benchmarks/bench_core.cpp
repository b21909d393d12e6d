#include <benchmark/benchmark.h>

#include "cdbulk/cd_kernel.hpp"
#include "cdbulk/harness.hpp"
#include "cdbulk/jacobi.hpp"
#include "cdbulk/varparam.hpp"

namespace {

using namespace cdbulk;

JacobiParams sparse_params() {
    return {SparseSpec::explicit_list({0.5, -0.3, 0.2}, {8, 64, 512}), std::nullopt};
}

void BM_EvalPolyFree(benchmark::State& state) {
    const JacobiParams params{SparseSpec::free_case(), std::nullopt};
    const std::int64_t n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_poly(n, cplx(0.6), params));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EvalPolyFree)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_EvalPolyCompensated(benchmark::State& state) {
    const JacobiParams params{SparseSpec::free_case(), std::nullopt};
    const std::int64_t n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval_poly(n, cplx(0.6), params, Precision::compensated));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EvalPolyCompensated)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_CdKernel(benchmark::State& state) {
    const JacobiParams params = sparse_params();
    const KernelQuery q{0.4, cplx(0.0), cplx(1.0), state.range(0)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(cd_kernel(q, params));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CdKernel)->RangeMultiplier(10)->Range(1000, 100000);

void BM_CdKernelDirect(benchmark::State& state) {
    const JacobiParams params = sparse_params();
    const KernelQuery q{0.4, cplx(0.0), cplx(1.0), state.range(0)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(cd_kernel_direct(q, params));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CdKernelDirect)->RangeMultiplier(10)->Range(1000, 100000);

void BM_KernelGrid11x11(benchmark::State& state) {
    const JacobiParams params = sparse_params();
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
            grid.emplace_back(-2.0 + 0.4 * i, -2.0 + 0.4 * j);
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(cd_kernel_grid(0.0, state.range(0), grid, params));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * std::int64_t(grid.size()));
}
BENCHMARK(BM_KernelGrid11x11)->RangeMultiplier(10)->Range(1000, 100000);

void BM_TransferMatrixPower(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(transfer_matrix(n, cplx(0.9, 1e-6)));
    }
}
BENCHMARK(BM_TransferMatrixPower)->RangeMultiplier(100)->Range(100, 1000000);

void BM_Quadrature(benchmark::State& state) {
    const JacobiParams params = sparse_params();
    for (auto _ : state) {
        benchmark::DoNotOptimize(quadrature_approx(state.range(0), params));
    }
}
BENCHMARK(BM_Quadrature)->RangeMultiplier(4)->Range(64, 4096);

} // namespace

BENCHMARK_MAIN();
