/// Microbenchmarks for the right-hand side, one RK4 step, and the heavier
/// diagnostics (Luxemburg bisection, record assembly).

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "nsk/init.hpp"
#include "nsk/solver.hpp"

using namespace nsk;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

State wave_state(GridPtr g) {
    PhysParams p;
    InitSpec init;
    init.amplitude = 0.05;
    init.modes = {{2, 1.0, 1.0}};
    init.seed = 1;
    SpectralOps ops(g);
    return build_initial_state(g, p, init, ops);
}

}  // namespace

static void BM_Tendencies(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    GridPtr g = Grid::make(dim, n, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    State s = wave_state(g);
    for (auto _ : state) {
        Tendencies t = tendencies(s, p, ops, CapillaryForm::Direct, true, 0.01);
        benchmark::DoNotOptimize(t.drho_dt.comp(0).data());
    }
}
BENCHMARK(BM_Tendencies)->Args({1, 256})->Args({1, 512})->Args({2, 64})->Args({2, 128});

static void BM_CapillaryTensorForm(benchmark::State& state) {
    GridPtr g = Grid::make(2, static_cast<int>(state.range(0)), kTwoPi);
    SpectralOps ops(g);
    State s = wave_state(g);
    for (auto _ : state) {
        Field f = capillary_force(s.rho, 0.01, CapillaryForm::TensorDivergence, ops, true);
        benchmark::DoNotOptimize(f.comp(0).data());
    }
}
BENCHMARK(BM_CapillaryTensorForm)->Arg(64)->Arg(128);

static void BM_Rk4Step(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    GridPtr g = Grid::make(dim, n, kTwoPi);
    SpectralOps ops(g);
    PhysParams p;
    TimeControls c;
    c.rho_floor = 0.5;
    State s = wave_state(g);
    const double dt = admissible_dt(s, p, c);
    for (auto _ : state) {
        StepResult r = rk4_step(s, p, c, dt, ops, CapillaryForm::Direct);
        benchmark::DoNotOptimize(r.state.rho.comp(0).data());
    }
}
BENCHMARK(BM_Rk4Step)->Args({1, 256})->Args({2, 64});

static void BM_LuxemburgNorm(benchmark::State& state) {
    GridPtr g = Grid::make(1, static_cast<int>(state.range(0)), kTwoPi);
    State s = wave_state(g);
    Field dev = Field::scalar(g);
    for (std::size_t i = 0; i < dev.points(); ++i)
        dev.comp(0)[i] = s.rho.comp(0)[i] - 1.0;
    OrliczSpec spec{2.0, 2.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(orlicz_norm(dev, spec));
}
BENCHMARK(BM_LuxemburgNorm)->Arg(256)->Arg(4096);

BENCHMARK_MAIN();
