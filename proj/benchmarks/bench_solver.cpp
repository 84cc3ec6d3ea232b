#include <benchmark/benchmark.h>

#include <random>

#include "sinkhorn_lqg/dr_solver.hpp"
#include "sinkhorn_lqg/oracles.hpp"
#include "sinkhorn_lqg/simulation.hpp"

namespace {

using namespace sinkhorn_lqg;

LiftedSystem benchmark_system(int horizon) {
  Matrix a(2, 2);
  a << 1.1, 0.1, 0.0, 1.1;
  const Matrix id = Matrix::Identity(2, 2);
  return build_lifted(SystemSpec::time_invariant(horizon, a, id, id, id, id, 1e-3 * id));
}

AmbiguityBlocks balls(int horizon, double rho) {
  const AmbiguitySpec s{SpdMatrix::identity(2), SpdMatrix::identity(2), rho, 1.0};
  const auto T = static_cast<std::size_t>(horizon);
  return AmbiguityBlocks{s, std::vector<AmbiguitySpec>(T, s), std::vector<AmbiguitySpec>(T, s)};
}

void BM_WorstCaseLmo(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const SpdMatrix cost = oracles::random_spd(rng, 2, 1.0, 100.0);
  const AmbiguitySpec s{SpdMatrix::identity(2), SpdMatrix::identity(2), 1e3, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(worst_case_lmo(cost, s));
}
BENCHMARK(BM_WorstCaseLmo);

void BM_InnerLqg(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const LiftedSystem sys = benchmark_system(T);
  const SpdMatrix w = SpdMatrix::identity(sys.w_dim());
  const SpdMatrix v = SpdMatrix::identity(sys.v_dim());
  for (auto _ : state) benchmark::DoNotOptimize(inner_lqg(sys, w, v));
}
BENCHMARK(BM_InnerLqg)->Arg(5)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_SolveGame(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const LiftedSystem sys = benchmark_system(T);
  const AmbiguityBlocks amb = balls(T, 1e3);
  SolverOptions opts;
  opts.tol_gap = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(solve_game(sys, amb, opts));
}
BENCHMARK(BM_SolveGame)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_RunPlan(benchmark::State& state) {
  const LiftedSystem sys = benchmark_system(25);
  const CovarianceBlocks nominal = balls(25, 1e3).centers();
  const Policy p = nominal_lqg(sys, nominal).policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_plan(sys, p, nominal, {1000, 1}, 1));
  }
}
BENCHMARK(BM_RunPlan)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
