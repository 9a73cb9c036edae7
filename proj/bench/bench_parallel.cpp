#include <benchmark/benchmark.h>

#include <cmath>

#include "shear/fourier.hpp"
#include "shear/pwe.hpp"
#include "shear/sweep.hpp"

using namespace shear;

namespace {

CellField circles(double f) {
    return CellField(NestedCircles{0, {{std::sqrt(f / 3.141592653589793), 1}}},
                     {Material(1.48e9, 1180.0), Material(80e9, 7800.0)});
}

void BM_Fourier2D(benchmark::State& state) {
    const CellField f = circles(0.4);
    for (auto _ : state) benchmark::DoNotOptimize(fourier2d(f, static_cast<int>(state.range(0))));
}

void BM_Fourier2DSerial(benchmark::State& state) {
    const CellField f = circles(0.4);
    for (auto _ : state) benchmark::DoNotOptimize(fourier2d_serial(f, static_cast<int>(state.range(0))));
}

void BM_AssemblePwe(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const FourierTable2D t = fourier2d(circles(0.4), 2 * N);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_pwe(t, N));
}

void BM_AssemblePweSerial(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const FourierTable2D t = fourier2d(circles(0.4), 2 * N);
    for (auto _ : state) benchmark::DoNotOptimize(assemble_pwe_serial(t, N));
}

SweepConfig sweep_config() {
    SweepConfig c;
    c.geometry.kind = GeometryKind::nested_squares;
    c.geometry.matrix = named_material("epoxy");
    c.geometry.inclusions = {{named_material("silicon"), 1.15}, {named_material("steel"), 1.0}};
    c.N = {0, 1, 2, 3, 4};
    c.f_grid = {0.1, 0.7, 4};
    return c;
}

void BM_RunSweep(benchmark::State& state) {
    const SweepConfig c = sweep_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(c));
}

void BM_RunSweepSerial(benchmark::State& state) {
    const SweepConfig c = sweep_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(c));
}

}  // namespace

BENCHMARK(BM_Fourier2D)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fourier2DSerial)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssemblePwe)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssemblePweSerial)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunSweep)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunSweepSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
