// Serial vs OpenMP timings for the parallel kernels. The second benchmark
// argument selects the execution policy (0 serial, 1 parallel).

#include "invpend/bounds.hpp"
#include "invpend/poincare.hpp"
#include "invpend/whitney.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace invpend;

namespace {

Execution policy(const benchmark::State& state) {
    return state.range(1) == 0 ? Execution::Serial : Execution::Parallel;
}

PeriodicSignal planar_circle(double amplitude, double period = 1.0) {
    Vec c(2), s(2);
    c << amplitude, 0.0;
    s << 0.0, amplitude;
    return make_fourier_forcing(period, 2, {c}, {s});
}

void BM_VerifyBoundSet(benchmark::State& state) {
    const auto F = planar_circle(1.5);
    const double a = compute_a_planar(9.81, forcing_norm(F), 0.5);
    const BoundSetSpec spec{a, 6.0, 2};
    VerifyConfig cfg;
    cfg.samples_per_face = static_cast<int>(state.range(0));
    cfg.exec = policy(state);
    const auto grid = default_lambda_grid();
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify_bound_set(spec, 9.81, F, grid, cfg));
    }
}

void BM_FiniteDifferenceJacobian(benchmark::State& state) {
    const auto F = planar_circle(0.5);
    const PhaseState z = PhaseState::planar(0.02, -0.01, 0.05, 0.0);
    IntegratorConfig cfg;
    cfg.rel_tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    cfg.abs_tol = 1e-2 * cfg.rel_tol;
    for (auto _ : state) {
        benchmark::DoNotOptimize(poincare_jacobian(z, {9.81, 1.0, 2}, F, cfg,
                                                   PoincareJacobianMode::FiniteDifference, 1e-7,
                                                   policy(state)));
    }
}

void BM_PlanarGridSearch(benchmark::State& state) {
    const JourneySpec journey{planar_circle(0.5, 2.0 * std::numbers::pi), 3.0, 9.81};
    const int resolution = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(planar_grid_search(journey, {}, resolution, 0.5, policy(state)));
    }
}

}  // namespace

BENCHMARK(BM_VerifyBoundSet)->ArgsProduct({{4, 8}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FiniteDifferenceJacobian)->ArgsProduct({{8, 12}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlanarGridSearch)->ArgsProduct({{9, 17}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
