#include "fxband/simulator.hpp"
#include "fxband/solver.hpp"

#include <benchmark/benchmark.h>

using namespace fxband;

namespace {

const ModelParams kParams{0.1, 0.3, 0.06, 1.4};
const CostSpec kCost{0.5};
const ReactionLaw kVolUp = ReactionLaw::fixed(1.0, 0.1, 0.0);

void BM_SolveBaseline(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve_t0(kParams, kCost));
}
BENCHMARK(BM_SolveBaseline)->Unit(benchmark::kMillisecond);

void BM_SolveReaction(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve(kParams, kCost, kVolUp));
}
BENCHMARK(BM_SolveReaction)->Unit(benchmark::kMillisecond);

void BM_SolveUniformWindow(benchmark::State& state) {
    const ReactionLaw law{UniformLaw{0.0, 1.0}, PointLaw{0.1}, PointLaw{0.0}};
    for (auto _ : state) benchmark::DoNotOptimize(solve(kParams, kCost, law));
}
BENCHMARK(BM_SolveUniformWindow)->Unit(benchmark::kMillisecond);

void BM_ExpectedAfter(benchmark::State& state) {
    const auto sol = solve(kParams, kCost, kVolUp);
    const BandValue band{sol.a, sol.b, sol.theta, sol.coeffs};
    const auto nodes = build_nodes(kVolUp, kParams);
    const int n_inner = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(expected_phi_after_terms(band, sol.alpha, nodes, kParams, n_inner));
}
BENCHMARK(BM_ExpectedAfter)->Arg(50)->Arg(200)->Arg(800);

// Path-steps per second of the Monte Carlo kernel (one thread).
void BM_SimulatePaths(benchmark::State& state) {
    const auto sol = solve(kParams, kCost, kVolUp);
    SimConfig cfg;
    cfg.n_paths = state.range(0);
    cfg.horizon = 25.0;
    cfg.threads = 1;
    const BandPolicy policy{sol.a, sol.b, sol.alpha};
    for (auto _ : state) benchmark::DoNotOptimize(simulate_paths(policy, kParams, kVolUp, kCost, cfg));
    state.SetItemsProcessed(state.iterations() * cfg.n_paths * cfg.steps());
}
BENCHMARK(BM_SimulatePaths)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
