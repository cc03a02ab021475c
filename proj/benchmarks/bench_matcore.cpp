// Microbenchmarks for the dense kernel: Jacobi eigensolve and SVD dominate
// every norm computation, so regressions here show up everywhere.

#include <benchmark/benchmark.h>

#include "symcore/matcore.hpp"
#include "symcore/rng.hpp"

using namespace symcore;

static void BM_HermEig(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(0xbe7c);
    CMatrix g = rng.gaussian_matrix(n, n);
    CMatrix a = 0.5 * (g + g.adjoint());
    for (auto _ : state) {
        HermEig e = herm_eig(a);
        benchmark::DoNotOptimize(e.values.data());
    }
}
BENCHMARK(BM_HermEig)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_Svd(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(0xbe7d);
    CMatrix a = rng.gaussian_matrix(n, n);
    for (auto _ : state) {
        Svd s = svd(a);
        benchmark::DoNotOptimize(s.sigma.data());
    }
}
BENCHMARK(BM_Svd)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_PsdLinearMax(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(0xbe7e);
    CMatrix m = rng.gaussian_matrix(n, n);
    for (auto _ : state) {
        PsdLinearMax r = psd_linear_max(m);
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(BM_PsdLinearMax)->Arg(4)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
