#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "sinkhorn_lqg/dr_solver.hpp"
#include "sinkhorn_lqg/oracles.hpp"

namespace sinkhorn_lqg {
namespace {

using testing::draw;
using testing::draw_dim;
using testing::draw_spd;
using testing::rng_for;
using testing::scalar_system;

// Upper root of G_1(1, s) = rho with reference 1, evaluated independently.
constexpr double kRoot1 = 1.2871310469192937;
constexpr double kRoot15 = 2.1641999062415619;
constexpr double kRoot2 = 2.8249797685269121;
// Unit scalar game: nature pushes every block to kRoot2 and the value is
// 3h - h/4 with h = kRoot2.
constexpr double kUnitGameValue = 2.75 * kRoot2;

const SpdMatrix kOne = SpdMatrix::diagonal({1.0});

AmbiguityBlocks uniform_blocks(const LiftedSystem& sys, double rho, double eps) {
  const AmbiguitySpec x{SpdMatrix::identity(sys.state_dim), SpdMatrix::identity(sys.state_dim), rho,
                        eps};
  const AmbiguitySpec v{SpdMatrix::identity(sys.output_dim), SpdMatrix::identity(sys.output_dim),
                        rho, eps};
  const auto T = static_cast<std::size_t>(sys.horizon);
  return AmbiguityBlocks{x, std::vector<AmbiguitySpec>(T, x), std::vector<AmbiguitySpec>(T, v)};
}

LiftedSystem benchmark_system(int horizon) {
  Matrix a(2, 2);
  a << 1.1, 0.1, 0.0, 1.1;
  const Matrix id = Matrix::Identity(2, 2);
  return build_lifted(SystemSpec::time_invariant(horizon, a, id, id, id, id, 1e-3 * id));
}

TEST(InnerLqg, ZeroLinearTermGivesZeroPolicy) {
  auto rng = rng_for(51);
  const LiftedSystem sys = build_lifted(testing::draw_system(rng, 3, 2, 1, 2));
  const InnerSolution s =
      inner_lqg(sys, SpdMatrix::zero(sys.w_dim()), SpdMatrix::identity(sys.v_dim()));
  EXPECT_LE(s.policy.U.norm(), 1e-12);
  EXPECT_NEAR(s.value, 0.0, 1e-12);
}

TEST(InnerLqg, UnitScalarInstance) {
  const LiftedSystem sys = build_lifted(scalar_system(1, 1.0, 1.0, 1.0, 1.0, 1.0));
  const InnerSolution s = inner_lqg(sys, SpdMatrix::identity(2), SpdMatrix::identity(1));
  EXPECT_NEAR(s.policy.U(0, 0), -0.25, 1e-12);
  EXPECT_NEAR(s.value, 2.75, 1e-12);
  EXPECT_LE(s.residual, 1e-12);
}

TEST(InnerLqg, BeatsRandomCausalPolicies) {
  auto rng = rng_for(52);
  const LiftedSystem sys = build_lifted(testing::draw_system(rng, 4, 2, 1, 2));
  const SpdMatrix w = draw_spd(rng, sys.w_dim(), 0.2, 3.0);
  const SpdMatrix v = draw_spd(rng, sys.v_dim(), 0.2, 3.0);
  const InnerSolution best = inner_lqg(sys, w, v);
  for (int i = 0; i < 1000; ++i) {
    Policy probe = testing::draw_causal_policy(rng, sys, draw(rng, 1e-3, 1.0));
    probe.U += best.policy.U;
    EXPECT_GE(expected_cost(sys, probe, w, v), best.value - 1e-9 * std::abs(best.value));
  }
  EXPECT_NO_THROW(require_causal(sys, best.policy));
}

TEST(InnerLqg, SingularOutputCovariance) {
  const LiftedSystem sys = build_lifted(scalar_system(1, 1.0, 1.0, 0.0, 1.0, 1.0));
  try {
    inner_lqg(sys, SpdMatrix::identity(2), SpdMatrix::zero(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularInnerSystem);
  }
}

TEST(NominalLqg, EqualsInnerAtNominal) {
  auto rng = rng_for(53);
  const LiftedSystem sys = build_lifted(testing::draw_system(rng, 3, 2, 2, 1));
  const CovarianceBlocks nominal = uniform_blocks(sys, 0.0, 0.0).centers();
  const InnerSolution a = nominal_lqg(sys, nominal);
  const InnerSolution b = inner_lqg(sys, nominal.assemble_w(), nominal.assemble_v());
  EXPECT_EQ(a.policy.U, b.policy.U);
  EXPECT_EQ(a.value, b.value);
}

TEST(NominalLqg, ScalarHandFormula) {
  auto rng = rng_for(54);
  for (int i = 0; i < 20; ++i) {
    const double a = draw(rng, -2, 2), b = draw(rng, -2, 2), c = draw(rng, -2, 2);
    const double q0 = draw(rng, 0, 2), q1 = draw(rng, 0.1, 2), r = draw(rng, 0.1, 2);
    const double x0 = draw(rng, 0.1, 3), w0 = draw(rng, 0.1, 3), v0 = draw(rng, 0.1, 3);
    const auto one = [](double v) { return Matrix::Constant(1, 1, v); };
    const LiftedSystem sys =
        build_lifted(SystemSpec::time_invariant(1, one(a), one(b), one(c), one(q0), one(q1), one(r)));
    const CovarianceBlocks nominal{SpdMatrix::diagonal({x0}), {SpdMatrix::diagonal({w0})},
                                   {SpdMatrix::diagonal({v0})}};
    const double k = -q1 * a * b * c * x0 / ((r + q1 * b * b) * (c * c * x0 + v0));
    EXPECT_NEAR(nominal_lqg(sys, nominal).policy.U(0, 0), k, 1e-12 * std::max(1.0, std::abs(k)));
  }
}

TEST(LagrangianMaximizer, StationaryAndRejectsSmallMultiplier) {
  auto rng = rng_for(55);
  const AmbiguitySpec s{draw_spd(rng, 3, 0.5, 2.0), draw_spd(rng, 3, 0.5, 2.0), 1.0, 0.7};
  const SpdMatrix c = draw_spd(rng, 3, 0.1, 1.0);
  const double lambda = 5.0;
  const SpdMatrix m = lagrangian_maximizer(c, s, lambda);
  const SpdMatrix g = c - lambda * gelbrich_gradient(s.center, m, s.reference, s.epsilon);
  EXPECT_LE(g.frobenius_norm(), 1e-10);
  EXPECT_THROW(lagrangian_maximizer(c, s, 1e-3), Error);
}

TEST(WorstCaseLmo, ZeroCostReturnsMinimizer) {
  const AmbiguitySpec s{kOne, kOne, 2.0, 1.0};
  const LmoResult r = worst_case_lmo(SpdMatrix::zero(1), s);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_NEAR(r.atom(0, 0), 7.0 / 9.0, 1e-6);
}

TEST(WorstCaseLmo, ScalarUpperRoot) {
  const SpdMatrix cost = SpdMatrix::diagonal({1.0});
  const double roots[] = {kRoot1, kRoot15, kRoot2};
  const double radii[] = {1.0, 1.5, 2.0};
  double previous = -1.0;
  for (int i = 0; i < 3; ++i) {
    const LmoResult r = worst_case_lmo(cost, AmbiguitySpec{kOne, kOne, radii[i], 1.0});
    EXPECT_NEAR(r.atom(0, 0), roots[i], 1e-5);
    EXPECT_LE(r.divergence, radii[i]);
    EXPECT_GT(r.value, previous);
    previous = r.value;
  }
}

TEST(WorstCaseLmo, FeasibleAndBeatsBoundaryPoints) {
  auto rng = rng_for(56);
  for (int i = 0; i < 30; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    AmbiguitySpec s{draw_spd(rng, d, 0.3, 3.0), draw_spd(rng, d, 0.3, 3.0), 0.0, draw(rng, 0.0, 3.0)};
    s.radius = minimal_radius_numeric(s) + draw(rng, 0.05, 5.0);
    const SpdMatrix cost = draw_spd(rng, d, 0.0, 2.0);
    const LmoResult r = worst_case_lmo(cost, s);
    EXPECT_LE(gelbrich_entropic(s.center, r.atom, s.reference, s.epsilon), s.radius);
    EXPECT_GE(r.divergence, s.radius - 1e-6 * std::max(1.0, s.radius));

    // Random rays from the minimizer, pushed to the boundary by bisection.
    const SpdMatrix inner = minimize_gelbrich(s.center, s.reference, s.epsilon).minimizer;
    for (int k = 0; k < 20; ++k) {
      const SpdMatrix dir = draw_spd(rng, d, -1.0, 1.0);
      double lo = 0.0, hi = 1.0;
      const auto inside = [&](double t) {
        const SpdMatrix m = inner + t * dir;
        return is_pd(m) && gelbrich_entropic(s.center, m, s.reference, s.epsilon) <= s.radius;
      };
      while (inside(hi) && hi < 1e6) hi *= 2.0;
      for (int b = 0; b < 60; ++b) (inside(0.5 * (lo + hi)) ? lo : hi) = 0.5 * (lo + hi);
      const double probe = (cost.matrix().cwiseProduct((inner + lo * dir).matrix())).sum();
      EXPECT_GE(r.value, probe - 1e-6 * std::max(1.0, std::abs(probe)));
    }
  }
}

TEST(WorstCaseLmo, InfeasibleRadius) {
  try {
    worst_case_lmo(SpdMatrix::diagonal({1.0}), AmbiguitySpec{kOne, kOne, 0.5, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(SolveGame, DegenerateBallsReduceToNominalLqg) {
  auto rng = rng_for(57);
  const LiftedSystem sys = build_lifted(testing::draw_system(rng, 3, 2, 1, 2));
  const AmbiguityBlocks amb = uniform_blocks(sys, 0.0, 0.0);
  const GameSolution g = solve_game(sys, amb);
  const InnerSolution n = nominal_lqg(sys, amb.centers());
  EXPECT_TRUE(g.converged);
  EXPECT_NEAR(g.nash_gap, 0.0, 1e-9);
  EXPECT_LE((g.policy.U - n.policy.U).norm(), 1e-9);
  EXPECT_NEAR(g.value, n.value, 1e-9 * std::abs(n.value));
}

TEST(SolveGame, UnitScalarGame) {
  const oracles::ScalarGame game;
  SolverOptions opts;
  opts.tol_gap = 1e-6;
  opts.max_iters = 5000;
  const GameSolution g = solve_game(build_lifted(game.system()), game.ambiguity(), opts);
  EXPECT_TRUE(g.converged);
  EXPECT_NEAR(g.value, kUnitGameValue, 1e-4);
  EXPECT_NEAR(g.worst_case.X0(0, 0), kRoot2, 1e-2);
  EXPECT_NEAR(g.worst_case.W[0](0, 0), kRoot2, 1e-2);
  EXPECT_NEAR(g.worst_case.V[0](0, 0), kRoot2, 1e-2);
}

TEST(SolveGame, CertificatesOnRandomInstances) {
  auto rng = rng_for(58);
  for (int i = 0; i < 5; ++i) {
    const LiftedSystem sys = build_lifted(testing::draw_system(rng, 3, 2, 1, 2));
    const AmbiguityBlocks amb = uniform_blocks(sys, draw(rng, 2.0, 20.0), draw(rng, 0.0, 2.0));
    SolverOptions opts;
    opts.max_iters = 2000;
    const GameSolution g = solve_game(sys, amb, opts);
    ASSERT_TRUE(g.converged);
    EXPECT_LE(g.nash_gap, opts.tol_gap * std::max(1.0, std::abs(g.value)));
    EXPECT_GE(g.nash_gap, -1e-8);
    EXPECT_NEAR(g.nash_gap, g.trace_primal - g.trace_dual, 1e-9 * std::abs(g.value));
    EXPECT_LE(g.policy.q.norm(), 1e-9);
    for (std::size_t b = 0; b < amb.block_count(); ++b) {
      const AmbiguitySpec& s = amb.block(b);
      EXPECT_LE(gelbrich_entropic(s.center, g.worst_case.block(b), s.reference, s.epsilon),
                s.radius + 1e-7);
    }
    for (std::size_t k = 0; k < g.history.size(); ++k) {
      EXPECT_GE(g.history[k].primal, g.history[k].dual - 1e-8);
      if (k > 0) EXPECT_GE(g.history[k].dual, g.history[k - 1].dual - 1e-10);
    }
  }
}

TEST(SolveGame, ValueGrowsWithRadius) {
  const LiftedSystem sys = benchmark_system(4);
  double previous = 0.0;
  for (double rho : {10.0, 20.0, 40.0}) {
    const GameSolution g = solve_game(sys, uniform_blocks(sys, rho, 1.0));
    EXPECT_GE(g.value, previous - 1e-6 * std::abs(g.value));
    previous = g.value;
  }
}

TEST(SolveGame, RejectsInfeasibleBlock) {
  const LiftedSystem sys = benchmark_system(2);
  AmbiguityBlocks amb = uniform_blocks(sys, 10.0, 1.0);
  amb.w[1].radius = 0.1;
  try {
    solve_game(sys, amb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
    EXPECT_NE(std::string(e.what()).find("w[1]"), std::string::npos);
  }
}

TEST(WorstCaseForPolicy, ReproducesPrimalAndDominatesNominal) {
  const LiftedSystem sys = benchmark_system(5);
  const AmbiguityBlocks amb = uniform_blocks(sys, 100.0, 1.0);
  const GameSolution g = solve_game(sys, amb);
  const WorstCase wc = worst_case_for_policy(sys, g.policy, amb);
  EXPECT_NEAR(wc.value, g.trace_primal, 1e-6 * std::abs(g.trace_primal));

  const CovarianceBlocks nominal = amb.centers();
  const InnerSolution lqg = nominal_lqg(sys, nominal);
  const WorstCase lqg_wc = worst_case_for_policy(sys, lqg.policy, amb);
  EXPECT_LT(lqg.value, lqg_wc.value);
  EXPECT_GE(wc.value, expected_cost(sys, g.policy, nominal.assemble_w(), nominal.assemble_v()));
  // The robust policy does no worse than LQG against its own worst case.
  EXPECT_LE(g.value, lqg_wc.value * (1.0 + 1e-4));
}

TEST(WorstCaseForPolicy, RobustAdvantageGrowsWithRadius) {
  const LiftedSystem sys = benchmark_system(10);
  SolverOptions opts;
  opts.tol_gap = 1e-3;
  double previous = -1.0;
  for (double rho : {1e3, 4e3}) {
    const AmbiguityBlocks amb = uniform_blocks(sys, rho, 1.0);
    const GameSolution dr = solve_game(sys, amb, opts);
    const InnerSolution lqg = nominal_lqg(sys, amb.centers());
    const double advantage =
        worst_case_for_policy(sys, lqg.policy, amb, opts).value - dr.trace_primal;
    EXPECT_GT(advantage, 0.0);
    EXPECT_GE(advantage, previous);
    previous = advantage;
  }
}

}  // namespace
}  // namespace sinkhorn_lqg
