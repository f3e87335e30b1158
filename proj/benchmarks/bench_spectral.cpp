/// Microbenchmarks for the transform layer and multiplier operators.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsk/spectral.hpp"

using namespace nsk;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field random_field(GridPtr g, unsigned seed) {
    std::mt19937_64 rng(seed);
    Field f = Field::scalar(g);
    for (auto& v : f.comp(0))
        v = 1.0 + 0.1 * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
    return f;
}

}  // namespace

static void BM_TransformRoundTrip1D(benchmark::State& state) {
    GridPtr g = Grid::make(1, static_cast<int>(state.range(0)), kTwoPi);
    SpectralOps ops(g);
    Field f = random_field(g, 1);
    Field out = Field::scalar(g);
    for (auto _ : state) {
        auto coeffs = ops.analyze(f.comp(0));
        ops.synthesize(coeffs, out.comp(0));
        benchmark::DoNotOptimize(out.comp(0).data());
    }
}
BENCHMARK(BM_TransformRoundTrip1D)->Arg(256)->Arg(512);

static void BM_TransformRoundTrip2D(benchmark::State& state) {
    GridPtr g = Grid::make(2, static_cast<int>(state.range(0)), kTwoPi);
    SpectralOps ops(g);
    Field f = random_field(g, 2);
    Field out = Field::scalar(g);
    for (auto _ : state) {
        auto coeffs = ops.analyze(f.comp(0));
        ops.synthesize(coeffs, out.comp(0));
        benchmark::DoNotOptimize(out.comp(0).data());
    }
}
BENCHMARK(BM_TransformRoundTrip2D)->Arg(64)->Arg(128)->Arg(256);

static void BM_FractionalPower2D(benchmark::State& state) {
    GridPtr g = Grid::make(2, static_cast<int>(state.range(0)), kTwoPi);
    SpectralOps ops(g);
    Field f = random_field(g, 3);
    for (auto _ : state) {
        Field out = ops.fractional_power(f, 1.3);
        benchmark::DoNotOptimize(out.comp(0).data());
    }
}
BENCHMARK(BM_FractionalPower2D)->Arg(64)->Arg(128);

static void BM_SobolevNorm2D(benchmark::State& state) {
    GridPtr g = Grid::make(2, static_cast<int>(state.range(0)), kTwoPi);
    SpectralOps ops(g);
    Field f = random_field(g, 4);
    for (auto _ : state) benchmark::DoNotOptimize(ops.sobolev_norm(f, 1.2));
}
BENCHMARK(BM_SobolevNorm2D)->Arg(64)->Arg(128);

static void BM_Dealias1D(benchmark::State& state) {
    GridPtr g = Grid::make(1, static_cast<int>(state.range(0)), kTwoPi);
    SpectralOps ops(g);
    Field f = random_field(g, 5);
    for (auto _ : state) {
        Field out = ops.dealias(f);
        benchmark::DoNotOptimize(out.comp(0).data());
    }
}
BENCHMARK(BM_Dealias1D)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
