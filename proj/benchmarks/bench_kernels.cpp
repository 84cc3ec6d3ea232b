#include <benchmark/benchmark.h>

#include <random>

#include "sinkhorn_lqg/divergences.hpp"
#include "sinkhorn_lqg/oracles.hpp"

namespace {

using namespace sinkhorn_lqg;

void BM_SpdSqrt(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const SpdMatrix a = oracles::random_spd(rng, state.range(0), 0.1, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(spd_sqrt(a));
}
BENCHMARK(BM_SpdSqrt)->Arg(2)->Arg(8)->Arg(52);

void BM_GelbrichEntropic(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Index d = state.range(0);
  const SpdMatrix a = oracles::random_spd(rng, d, 0.3, 3.0);
  const SpdMatrix b = oracles::random_spd(rng, d, 0.3, 3.0);
  const SpdMatrix ref = SpdMatrix::identity(d);
  for (auto _ : state) benchmark::DoNotOptimize(gelbrich_entropic(a, b, ref, 1.0));
}
BENCHMARK(BM_GelbrichEntropic)->Arg(2)->Arg(8);

void BM_GelbrichGradient(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const SpdMatrix a = oracles::random_spd(rng, 2, 0.3, 3.0);
  const SpdMatrix b = oracles::random_spd(rng, 2, 0.3, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(gelbrich_gradient(a, b, SpdMatrix::identity(2), 1.0));
}
BENCHMARK(BM_GelbrichGradient);

void BM_MinimalRadiusNumeric(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const AmbiguitySpec s{oracles::random_spd(rng, 2, 0.3, 3.0), SpdMatrix::identity(2), 0.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(minimal_radius_numeric(s));
}
BENCHMARK(BM_MinimalRadiusNumeric);

}  // namespace
