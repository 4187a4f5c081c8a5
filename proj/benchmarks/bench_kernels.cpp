// Kernel benchmarks comparing the serial reference path with the OpenMP
// path. Each benchmark takes (n, parallel) as arguments; run with
//   ./bench-kernels --benchmark_filter=...
#include <benchmark/benchmark.h>

#include "rotlim/norms.hpp"
#include "rotlim/nsc.hpp"
#include "rotlim/operators.hpp"
#include "rotlim/parallel.hpp"

using namespace rotlim;

namespace {

InitialData make_data(int n) { return ill_prepared_data(GridSpec(n), 42, 0.25); }

void apply_args(benchmark::internal::Benchmark* b) {
    for (int n : {64, 128})
        for (int par : {0, 1}) b->Args({n, par});
}

void BM_transform_roundtrip(benchmark::State& state) {
    set_parallel(state.range(1) != 0);
    const InitialData d = make_data(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        std::vector<double> phys = transform(d.r0);
        benchmark::DoNotOptimize(inverse_transform(d.r0.grid, phys));
    }
    set_parallel(true);
}

void BM_dealiased_product(benchmark::State& state) {
    set_parallel(state.range(1) != 0);
    const InitialData d = make_data(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(multiply(d.u0.x, d.u0.y));
    set_parallel(true);
}

void BM_leray_project(benchmark::State& state) {
    set_parallel(state.range(1) != 0);
    const InitialData d = make_data(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(leray_project(d.u0));
    set_parallel(true);
}

void BM_sobolev_norm(benchmark::State& state) {
    set_parallel(state.range(1) != 0);
    const InitialData d = make_data(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sobolev_norm(d.r0, -3.0));
    set_parallel(true);
}

void BM_nsc_step(benchmark::State& state) {
    set_parallel(state.range(1) != 0);
    const int n = static_cast<int>(state.range(0));
    const InitialData d = make_data(n);
    FlowParams p;
    p.eps = 0.25;
    const double dt = 1e-3;
    for (auto _ : state) {
        // two steps through the full pipeline (propagator setup amortized)
        SimResult res = simulate(d.r0, d.u0, p, 2 * dt, dt, 2);
        benchmark::DoNotOptimize(res);
    }
    set_parallel(true);
}

BENCHMARK(BM_transform_roundtrip)->Apply(apply_args);
BENCHMARK(BM_dealiased_product)->Apply(apply_args);
BENCHMARK(BM_leray_project)->Apply(apply_args);
BENCHMARK(BM_sobolev_norm)->Apply(apply_args);
BENCHMARK(BM_nsc_step)->Apply(apply_args);

}  // namespace

BENCHMARK_MAIN();
