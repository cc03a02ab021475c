// SPDX-License-Identifier: MIT
//
// End-to-end cost of the norm estimators on the standing small instances.
// These dominate the CLI wall time, so the interesting axes are restart
// count (multistart ascent) and truncation level (plus-norm ladder).

#include <benchmark/benchmark.h>

#include "symcore/dualops.hpp"
#include "symcore/trilinear.hpp"
#include "symcore/tro.hpp"

using namespace symcore;

namespace {

// rotated projection pair at t = 0.2, the standing gap instance
std::pair<CMatrix, CMatrix> gamma_pair() {
    const double t = 0.2, sn = std::sqrt(1.0 - t * t);
    CMatrix p(2, 2), ut(2, 2);
    p(0, 0) = 1;
    ut(0, 0) = t;
    ut(1, 0) = sn;
    ut(0, 1) = -sn;
    ut(1, 1) = t;
    return {p, ut * p};
}

TensorElement gamma_tensor() {
    auto [p, utp] = gamma_pair();
    ConcreteOpSpace e = space_Mn(2);
    return TensorElement::elementary(e, scalar_middle(1), project_onto(e, p).coeffs,
                                     {cplx(1.0, 0.0)}, project_onto(e, utp).coeffs);
}

}  // namespace

static void BM_PlusNorm(benchmark::State& state) {
    auto [p, utp] = gamma_pair();
    const int k = static_cast<int>(state.range(0));
    PlusConfig cfg;
    cfg.restarts = 16;
    for (auto _ : state) {
        PlusResult r = plus_norm({{p, utp}}, k, cfg);
        benchmark::DoNotOptimize(r.value);
    }
}
BENCHMARK(BM_PlusNorm)->Arg(1)->Arg(2)->Arg(3);

static void BM_HaagerupUpper(benchmark::State& state) {
    TensorElement u = gamma_tensor();
    for (auto _ : state) {
        HaagerupWitness w = haagerup_upper(u, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(w.value);
    }
}
BENCHMARK(BM_HaagerupUpper)->Arg(20)->Arg(60);

static void BM_SymNorm(benchmark::State& state) {
    TensorElement u = gamma_tensor();
    SymConfig cfg;
    cfg.restarts = static_cast<int>(state.range(0));
    cfg.max_trunc = 2;
    for (auto _ : state) {
        SymNormResult r = sym_norm(u, cfg);
        benchmark::DoNotOptimize(r.lower);
    }
}
BENCHMARK(BM_SymNorm)->Arg(4)->Arg(16);

static void BM_CbNorm(benchmark::State& state) {
    Rng rng(0xbe7f);
    LinMap phi = sample_cc_map(space_Mn(2), 2, 2, 2, rng);
    CbConfig cfg;
    cfg.restarts = static_cast<int>(state.range(0));
    for (auto _ : state) {
        NormInterval n = cb_norm(phi, cfg);
        benchmark::DoNotOptimize(n.lower);
    }
}
BENCHMARK(BM_CbNorm)->Arg(8)->Arg(32);

static void BM_GnsFactorise(benchmark::State& state) {
    Rng rng(0xbe80);
    LinMap phi = sample_cc_map(space_Cn(2), 2, 1, 2, rng);
    LinMap psi = sample_ucp(space_Mn(2), 2, rng).as_linmap();
    TrilinearForm theta = TrilinearForm::from_pair(phi, psi, phi);
    for (auto _ : state) {
        GnsFactorisation g = gns_factorise(theta);
        benchmark::DoNotOptimize(g.reconstruction_residual);
    }
}
BENCHMARK(BM_GnsFactorise);

static void BM_BalancedDemo(benchmark::State& state) {
    BalancedConfig cfg;
    cfg.restarts = static_cast<int>(state.range(0));
    for (auto _ : state) {
        BalancedDemo d = balanced_demo(cfg);
        benchmark::DoNotOptimize(d.unbalanced_lower);
    }
}
BENCHMARK(BM_BalancedDemo)->Arg(8);
