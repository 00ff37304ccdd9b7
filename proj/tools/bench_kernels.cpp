// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <cmath>

#include "conflab/flows.hpp"
#include "conflab/functionals.hpp"
#include "conflab/symmfunc.hpp"

using namespace conflab;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

Vec profile(const SphereConfig& cfg) {
    return sample(cfg, [](double t) { return 0.05 * std::cos(2.0 * t) + 0.02 * std::cos(3.0 * t); });
}

void BM_GeometryState(benchmark::State& st) {
    const SphereConfig cfg(2, 4001);
    const Vec u = profile(cfg);
    for (auto _ : st) benchmark::DoNotOptimize(geometry_state(cfg, u, exec_of(st)));
}

void BM_EnergyE(benchmark::State& st) {
    const SphereConfig cfg(2, 401);
    const Vec u = profile(cfg);
    for (auto _ : st) benchmark::DoNotOptimize(energy_E(cfg, u, 16, exec_of(st)));
}

void BM_FuzzCroosh(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(fuzz_croosh(8, 20000, 7, {}, exec_of(st)));
}

void BM_BvpJacobian(benchmark::State& st) {
    const SphereConfig cfg(2, 65);
    const Vec u0 = profile(cfg);
    const Vec u1 = sample(cfg, [](double t) { return -0.03 * std::cos(2.0 * t); });
    BvpOptions opt;
    opt.max_iter = 1;
    opt.monitor_F = false;
    opt.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(geodesic_bvp(cfg, u0, u1, opt));
}

} // namespace

BENCHMARK(BM_GeometryState)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EnergyE)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FuzzCroosh)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BvpJacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
