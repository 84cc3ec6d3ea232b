#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "sinkhorn_lqg/oracle_suite.hpp"
#include "sinkhorn_lqg/oracles.hpp"

namespace sinkhorn_lqg {
namespace {

using testing::draw;
using testing::draw_dim;
using testing::draw_spd;
using testing::rng_for;

constexpr double kG_1_15 = 1.0965735902799727;
constexpr double kRoot2 = 2.8249797685269121;

const SpdMatrix kOne = SpdMatrix::diagonal({1.0});
const SpdMatrix kOneHalf = SpdMatrix::diagonal({1.5});

TEST(CouplingDescent, IdenticalMarginalsNearZeroEpsilon) {
  const SpdMatrix id = SpdMatrix::identity(2);
  const oracles::CouplingOptimum o = oracles::coupling_descent(id, id, id, 1e-6);
  EXPECT_LE((o.cross - Matrix::Identity(2, 2)).norm(), 1e-3);
}

TEST(CouplingDescent, ScalarInstance) {
  const oracles::CouplingOptimum o = oracles::coupling_descent(kOne, kOneHalf, kOne, 1.0);
  EXPECT_NEAR(o.cross(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(o.value, kG_1_15, 1e-9);
}

TEST(CouplingDescent, ScalarInstanceAgainstGrid) {
  double best = 1e300;
  double arg = 0.0;
  for (int i = 0; i <= 24000; ++i) {
    const double k = -1.2 + 1e-4 * i;
    try {
      const double v =
          oracles::coupling_objective(kOne, kOneHalf, kOne, 1.0, Matrix::Constant(1, 1, k));
      if (v < best) {
        best = v;
        arg = k;
      }
    } catch (const Error&) {
    }
  }
  EXPECT_NEAR(arg, 1.0, 1e-4);
  EXPECT_NEAR(best, oracles::coupling_descent(kOne, kOneHalf, kOne, 1.0).value, 1e-7);
}

TEST(CouplingDescent, MatchesClosedFormCoupling) {
  auto rng = rng_for(71);
  for (int i = 0; i < 20; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const SpdMatrix s1 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix s2 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const double eps = draw(rng, 0.1, 10.0);
    const oracles::CouplingOptimum o = oracles::coupling_descent(s1, s2, ref, eps);
    EXPECT_LE((o.cross - optimal_coupling_cross(s1, s2, eps)).norm(), 1e-6);
    EXPECT_NEAR(o.value, sinkhorn_gaussian(s1, s2, ref, eps), 1e-6);
  }
}

TEST(CouplingDescent, RequiresPositiveEpsilon) {
  EXPECT_THROW(oracles::coupling_descent(kOne, kOne, kOne, 0.0), Error);
}

TEST(DecompositionIdentity, OptimalCouplingHasZeroKl) {
  auto rng = rng_for(72);
  const SpdMatrix s1 = draw_spd(rng, 3, 0.3, 3.0);
  const SpdMatrix s2 = draw_spd(rng, 3, 0.3, 3.0);
  const SpdMatrix ref = draw_spd(rng, 3, 0.3, 3.0);
  const oracles::Decomposition dec =
      oracles::decomposition_identity(s1, s2, ref, 0.8, optimal_coupling_cross(s1, s2, 0.8));
  const double g = gelbrich_entropic(s1, s2, ref, 0.8);
  EXPECT_NEAR(dec.kl_to_optimal, 0.0, 1e-10);
  EXPECT_NEAR(dec.lhs, g, 1e-10);
  EXPECT_NEAR(dec.rhs, g, 1e-10);
}

TEST(DecompositionIdentity, IndependentCouplingScalar) {
  const oracles::Decomposition dec =
      oracles::decomposition_identity(kOne, kOneHalf, kOne, 1.0, Matrix::Zero(1, 1));
  EXPECT_NEAR(dec.lhs, dec.rhs, 1e-12);
  EXPECT_GT(dec.lhs, kG_1_15);
}

TEST(DecompositionIdentity, RandomFeasibleCouplings) {
  auto rng = rng_for(73);
  for (int i = 0; i < 100; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const SpdMatrix s1 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix s2 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const double eps = draw(rng, 0.1, 10.0);
    // Correlation matrix with spectral norm < 1 keeps the joint PD.
    Matrix z = testing::draw_gaussian(rng, d, d);
    z *= draw(rng, 0.0, 0.95) / Eigen::JacobiSVD<Matrix>(z).singularValues()(0);
    const Matrix k = spd_sqrt(s1).matrix() * z * spd_sqrt(s2).matrix();
    const oracles::Decomposition dec = oracles::decomposition_identity(s1, s2, ref, eps, k);
    EXPECT_LE(std::abs(dec.lhs - dec.rhs), 1e-8 * std::max(1.0, std::abs(dec.lhs)));
    EXPECT_GE(dec.lhs, gelbrich_entropic(s1, s2, ref, eps) - 1e-9);
  }
}

TEST(DecompositionIdentity, RejectsInfeasibleCoupling) {
  EXPECT_THROW(oracles::decomposition_identity(kOne, kOneHalf, kOne, 1.0, Matrix::Constant(1, 1, 2.0)),
               Error);
}

TEST(FdGradientCheck, LinearFunctionIsExact) {
  auto rng = rng_for(74);
  const SpdMatrix c = draw_spd(rng, 3, -1.0, 2.0);
  const oracles::MatrixFunction fn = [&](const SpdMatrix& m) {
    return (c.matrix().cwiseProduct(m.matrix())).sum();
  };
  const oracles::MatrixGradient grad = [&](const SpdMatrix&) { return c; };
  EXPECT_LE(oracles::fd_gradient_check(fn, grad, draw_spd(rng, 3, 0.5, 2.0), 1e-3), 1e-10);
}

TEST(FdGradientCheck, GelbrichGradient) {
  auto rng = rng_for(75);
  for (int i = 0; i < 20; ++i) {
    const Index d = draw_dim(rng, 1, 4);
    const SpdMatrix s1 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const double eps = draw(rng, 0.05, 5.0);
    const oracles::MatrixFunction fn = [&](const SpdMatrix& m) {
      return gelbrich_entropic(s1, m, ref, eps);
    };
    const oracles::MatrixGradient grad = [&](const SpdMatrix& m) {
      return gelbrich_gradient(s1, m, ref, eps);
    };
    EXPECT_LE(oracles::fd_gradient_check(fn, grad, draw_spd(rng, d, 0.3, 3.0), 1e-5), 1e-5);
  }
}

TEST(FdGradientCheck, SecondOrderInStep) {
  auto rng = rng_for(76);
  const SpdMatrix s1 = draw_spd(rng, 2, 0.3, 3.0);
  const SpdMatrix point = draw_spd(rng, 2, 0.3, 3.0);
  const oracles::MatrixFunction fn = [&](const SpdMatrix& m) {
    return gelbrich_entropic(s1, m, SpdMatrix::identity(2), 1.0);
  };
  const oracles::MatrixGradient grad = [&](const SpdMatrix& m) {
    return gelbrich_gradient(s1, m, SpdMatrix::identity(2), 1.0);
  };
  const double e3 = oracles::fd_gradient_check(fn, grad, point, 1e-3);
  const double e4 = oracles::fd_gradient_check(fn, grad, point, 1e-4);
  const double e5 = oracles::fd_gradient_check(fn, grad, point, 1e-5);
  EXPECT_GT(e3 / e4, 30.0);
  EXPECT_LT(e4, e3);
  EXPECT_LT(e5, e3);
}

TEST(LagrangianAscent, MatchesClosedForm) {
  auto rng = rng_for(77);
  for (int i = 0; i < 10; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const AmbiguitySpec s{draw_spd(rng, d, 0.3, 3.0), draw_spd(rng, d, 0.3, 3.0), 1.0,
                          draw(rng, 0.1, 3.0)};
    const SpdMatrix c = draw_spd(rng, d, 0.1, 1.0);
    const double lambda = 4.0 + draw(rng, 0.0, 4.0);
    const SpdMatrix ascent = oracles::lagrangian_ascent(c, s, lambda);
    const SpdMatrix closed = lagrangian_maximizer(c, s, lambda);
    EXPECT_LE((ascent - closed).frobenius_norm(), 1e-6 * std::max(1.0, closed.frobenius_norm()));
  }
}

TEST(ScalarGelbrich, MatchesMatrixRoutine) {
  auto rng = rng_for(78);
  for (int i = 0; i < 50; ++i) {
    const double a = draw(rng, 0.1, 5.0), b = draw(rng, 0.1, 5.0), r = draw(rng, 0.1, 5.0);
    const double eps = (i % 5 == 0) ? 0.0 : draw(rng, 0.01, 10.0);
    EXPECT_NEAR(oracles::scalar_gelbrich(a, b, r, eps),
                gelbrich_entropic(SpdMatrix::diagonal({a}), SpdMatrix::diagonal({b}),
                                  SpdMatrix::diagonal({r}), eps),
                1e-12 * std::max(1.0, std::abs(oracles::scalar_gelbrich(a, b, r, eps))));
  }
}

TEST(RhoMinScalar, Examples) {
  const oracles::ScalarMinimum m = oracles::rho_min_scalar(1.0, 1.0, 1.0);
  EXPECT_NEAR(m.value, 0.88263947766738818, 1e-9);
  EXPECT_NEAR(m.argmin, 7.0 / 9.0, 1e-4);
  const oracles::ScalarMinimum tiny = oracles::rho_min_scalar(1.0, 1.0, 1e-8);
  EXPECT_NEAR(tiny.value, 0.0, 1e-6);
  EXPECT_NEAR(tiny.argmin, 1.0, 1e-3);
}

TEST(RhoMinScalar, AgreesWithNumericMinimalRadius) {
  auto rng = rng_for(79);
  for (int i = 0; i < 10; ++i) {
    const double c = draw(rng, 0.3, 3.0), r = draw(rng, 0.3, 3.0), eps = draw(rng, 0.1, 3.0);
    const AmbiguitySpec s{SpdMatrix::diagonal({c}), SpdMatrix::diagonal({r}), 0.0, eps};
    EXPECT_NEAR(minimal_radius_numeric(s), oracles::rho_min_scalar(c, r, eps).value, 1e-6);
  }
}

TEST(ScalarFeasibleInterval, UpperRoot) {
  const auto [lo, hi] = oracles::scalar_feasible_interval(1.0, 1.0, 1.0, 2.0);
  EXPECT_NEAR(hi, kRoot2, 1e-10);
  EXPECT_NEAR(lo, 0.048163368075489165, 1e-10);
  EXPECT_THROW(oracles::scalar_feasible_interval(1.0, 1.0, 1.0, 0.5), Error);
}

TEST(BruteGame, NominalLimit) {
  oracles::ScalarGame g;
  g.epsilon = 0.0;
  g.rho_x0 = g.rho_w0 = g.rho_v0 = 0.0;
  const oracles::BruteGameResult r = oracles::brute_game(g);
  EXPECT_NEAR(r.gain, -0.25, 1e-6);
  EXPECT_NEAR(r.value, 2.75, 1e-6);
}

TEST(BruteGame, UnitInstanceAgainstSolver) {
  const oracles::CheckResult r = oracles::check_brute_game(oracles::ScalarGame{});
  EXPECT_TRUE(r.pass) << r.detail;
  const oracles::BruteGameResult b = oracles::brute_game(oracles::ScalarGame{});
  EXPECT_NEAR(b.value, 2.75 * kRoot2, 1e-6);
}

TEST(BruteGame, NondecreasingInRadius) {
  double previous = 0.0;
  for (double rho : {1.0, 1.5, 2.0}) {
    oracles::ScalarGame g;
    g.rho_x0 = g.rho_w0 = g.rho_v0 = rho;
    const double v = oracles::brute_game(g, 40).value;
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(ScalarGameCost, MatchesTraceFormula) {
  const oracles::ScalarGame g;
  const LiftedSystem sys = build_lifted(g.system());
  const Policy p{Matrix::Constant(1, 1, -0.3), Vector::Zero(1)};
  EXPECT_NEAR(oracles::scalar_game_cost(g, -0.3, 1.2, 0.7, 2.0),
              expected_cost(sys, p, SpdMatrix::diagonal({1.2, 0.7}), SpdMatrix::diagonal({2.0})),
              1e-13);
}

class OracleSuite : public ::testing::TestWithParam<const char*> {};

TEST_P(OracleSuite, Passes) {
  const auto report = oracles::run_oracle_suite(oracles::parse_suite_kind(GetParam()), 0);
  EXPECT_FALSE(report.empty());
  EXPECT_TRUE(oracles::suite_passed(report)) << report.dump(2);
  for (const auto& [name, entry] : report.items()) {
    EXPECT_TRUE(entry.contains("metric")) << name;
    EXPECT_TRUE(entry.contains("tolerance")) << name;
  }
}

INSTANTIATE_TEST_SUITE_P(Canonical, OracleSuite, ::testing::Values("default", "scalar", "random"));

TEST(OracleSuiteKind, RejectsUnknown) { EXPECT_THROW(oracles::parse_suite_kind("full"), Error); }

}  // namespace
}  // namespace sinkhorn_lqg
