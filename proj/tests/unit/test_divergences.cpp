#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "sinkhorn_lqg/divergences.hpp"

namespace sinkhorn_lqg {
namespace {

using testing::draw;
using testing::draw_dim;
using testing::draw_spd;
using testing::rng_for;

// Reference values evaluated independently at 30 digits.
constexpr double kG_1_15 = 1.0965735902799727;      // G_1(1, 1.5), ref 1
constexpr double kG_I2 = 1.8175080164895482;        // G_1(I2, I2), ref I2
constexpr double kRhoMinClosed = 0.59657359027997265;
constexpr double kRhoMinNumeric = 0.88263947766738818;  // attained at 7/9
constexpr double kKl_1_2 = 0.096573590279972655;
constexpr double kCrossIdentity = 0.78077640640441514;  // sqrt(17/16) - 1/4

const SpdMatrix kOne = SpdMatrix::diagonal({1.0});
const SpdMatrix kOneHalf = SpdMatrix::diagonal({1.5});
const SpdMatrix kI2 = SpdMatrix::identity(2);

AmbiguitySpec spec(const SpdMatrix& center, const SpdMatrix& ref, double radius, double eps) {
  return AmbiguitySpec{center, ref, radius, eps};
}

TEST(GaussianKl, Examples) {
  EXPECT_NEAR(gaussian_kl(kI2, kI2), 0.0, 1e-15);
  EXPECT_NEAR(gaussian_kl(kOne, SpdMatrix::diagonal({2.0})), kKl_1_2, 1e-14);
}

TEST(GaussianKl, NonNegativeAndZeroOnlyAtEquality) {
  auto rng = rng_for(21);
  for (int i = 0; i < 50; ++i) {
    const Index d = draw_dim(rng, 1, 4);
    const SpdMatrix a = draw_spd(rng, d, 0.2, 5.0);
    const SpdMatrix b = draw_spd(rng, d, 0.2, 5.0);
    EXPECT_GT(gaussian_kl(a, b), 0.0);
    EXPECT_NEAR(gaussian_kl(a, a), 0.0, 1e-12);
  }
}

TEST(GaussianKl, Errors) {
  EXPECT_THROW(gaussian_kl(kI2, SpdMatrix::diagonal({1.0, 0.0})), Error);
  try {
    gaussian_kl(kI2, kOne);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

TEST(GelbrichEntropic, ScalarExample) {
  EXPECT_NEAR(gelbrich_entropic(kOne, kOneHalf, kOne, 1.0), kG_1_15, 1e-12);
}

TEST(GelbrichEntropic, IdentityExample) {
  EXPECT_NEAR(gelbrich_entropic(kI2, kI2, kI2, 1.0), kG_I2, 1e-12);
}

TEST(GelbrichEntropic, ZeroEpsilonIsSquaredGelbrich) {
  auto rng = rng_for(22);
  for (int i = 0; i < 20; ++i) {
    const SpdMatrix a = draw_spd(rng, draw_dim(rng, 1, 4), 0.2, 5.0);
    EXPECT_NEAR(gelbrich_entropic(a, a, a, 0.0), 0.0, 1e-10);
  }
  // Commuting case: sum of (sqrt(a_i) - sqrt(b_i))^2.
  EXPECT_NEAR(gelbrich_entropic(SpdMatrix::diagonal({1.0, 4.0}), SpdMatrix::diagonal({4.0, 9.0}),
                                kI2, 0.0),
              2.0, 1e-12);
}

TEST(GelbrichEntropic, SmallEpsilonApproachesGelbrich) {
  auto rng = rng_for(23);
  for (int i = 0; i < 50; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const SpdMatrix a = draw_spd(rng, d, 0.5, 2.0);
    const SpdMatrix b = draw_spd(rng, d, 0.5, 2.0);
    const SpdMatrix ref = SpdMatrix::identity(d);
    EXPECT_LE(std::abs(gelbrich_entropic(a, b, ref, 1e-6) - gelbrich_entropic(a, b, ref, 0.0)),
              1e-3);
  }
}

TEST(GelbrichEntropic, ConvexInSecondArgument) {
  auto rng = rng_for(24);
  for (int i = 0; i < 100; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const double eps = draw(rng, 0.0, 5.0);
    const SpdMatrix center = draw_spd(rng, d, 0.1, 5.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix a = draw_spd(rng, d, 0.1, 5.0);
    const SpdMatrix b = draw_spd(rng, d, 0.1, 5.0);
    for (double w : {0.25, 0.5, 0.75}) {
      const double mid = gelbrich_entropic(center, w * a + (1.0 - w) * b, ref, eps);
      const double chord =
          w * gelbrich_entropic(center, a, ref, eps) + (1.0 - w) * gelbrich_entropic(center, b, ref, eps);
      EXPECT_LE(mid, chord + 1e-9);
    }
  }
}

TEST(GelbrichEntropic, GrowsWithoutBound) {
  auto rng = rng_for(25);
  const SpdMatrix center = draw_spd(rng, 2, 0.5, 2.0);
  double previous = -1.0;
  for (double c : {1e2, 1e3, 1e4}) {
    const double g = gelbrich_entropic(center, SpdMatrix::scaled_identity(2, c), kI2, 1.0);
    EXPECT_GT(g, previous);
    previous = g;
  }
  EXPECT_GT(previous, 1e3);
}

TEST(GelbrichEntropic, Errors) {
  EXPECT_THROW(gelbrich_entropic(kI2, kOne, kI2, 1.0), Error);
  EXPECT_THROW(gelbrich_entropic(kI2, SpdMatrix::diagonal({1.0, 0.0}), kI2, 1.0), Error);
}

TEST(SinkhornGaussian, MatchesGelbrichExactly) {
  auto rng = rng_for(26);
  for (int i = 0; i < 100; ++i) {
    const Index d = draw_dim(rng, 1, 4);
    const SpdMatrix a = draw_spd(rng, d, 0.2, 5.0);
    const SpdMatrix b = draw_spd(rng, d, 0.2, 5.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.2, 5.0);
    const double eps = draw(rng, 0.0, 10.0);
    EXPECT_EQ(sinkhorn_gaussian(a, b, ref, eps), gelbrich_entropic(a, b, ref, eps));
  }
  EXPECT_NEAR(sinkhorn_gaussian(kOne, kOneHalf, kOne, 1.0), kG_1_15, 1e-12);
}

TEST(OptimalCouplingCross, Examples) {
  EXPECT_TRUE(optimal_coupling_cross(kI2, kI2, 0.0).isApprox(Matrix::Identity(2, 2), 1e-14));
  EXPECT_NEAR(optimal_coupling_cross(kOne, kOneHalf, 1.0)(0, 0), 1.0, 1e-14);
  const Matrix k = optimal_coupling_cross(SpdMatrix::identity(3), SpdMatrix::identity(3), 1.0);
  EXPECT_TRUE(k.isApprox(kCrossIdentity * Matrix::Identity(3, 3), 1e-14));
}

TEST(OptimalCoupling, IsFeasible) {
  auto rng = rng_for(27);
  for (int i = 0; i < 30; ++i) {
    const Index d = draw_dim(rng, 1, 4);
    const GaussianCoupling c =
        optimal_coupling(draw_spd(rng, d, 0.2, 5.0), draw_spd(rng, d, 0.2, 5.0), draw(rng, 0.01, 5.0));
    EXPECT_TRUE(c.is_feasible());
    EXPECT_TRUE(is_pd(c.schur_complement()));
  }
}

TEST(GelbrichGradient, Symmetric) {
  auto rng = rng_for(28);
  for (int i = 0; i < 20; ++i) {
    const Index d = draw_dim(rng, 1, 4);
    const SpdMatrix g = gelbrich_gradient(draw_spd(rng, d, 0.2, 5.0), draw_spd(rng, d, 0.2, 5.0),
                                          draw_spd(rng, d, 0.2, 5.0), draw(rng, 0.0, 5.0));
    EXPECT_LE((g.matrix() - g.matrix().transpose()).norm(), 1e-12);
  }
}

// Central differences along the symmetric basis; independent of the oracle
// helper so the helper itself is not the only check.
TEST(GelbrichGradient, MatchesFiniteDifferences) {
  auto rng = rng_for(29);
  const double h = 1e-5;
  for (int i = 0; i < 20; ++i) {
    const Index d = draw_dim(rng, 1, 4);
    const SpdMatrix s1 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix s2 = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const double eps = draw(rng, 0.05, 5.0);
    const SpdMatrix grad = gelbrich_gradient(s1, s2, ref, eps);
    const double scale = grad.matrix().cwiseAbs().maxCoeff();
    for (Index r = 0; r < d; ++r) {
      for (Index c = r; c < d; ++c) {
        Matrix e = Matrix::Zero(d, d);
        e(r, c) = e(c, r) = h;
        const double fd = (gelbrich_entropic(s1, SpdMatrix(s2.matrix() + e), ref, eps) -
                           gelbrich_entropic(s1, SpdMatrix(s2.matrix() - e), ref, eps)) /
                          (2.0 * h);
        const double an = (r == c) ? grad(r, r) : 2.0 * grad(r, c);
        EXPECT_LE(std::abs(fd - an) / std::max({std::abs(an), 1e-2 * scale, 1e-12}), 1e-5);
      }
    }
  }
}

TEST(GelbrichGradient, VanishesAtMinimizer) {
  auto rng = rng_for(30);
  for (int i = 0; i < 10; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const SpdMatrix center = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const double eps = draw(rng, 0.1, 3.0);
    const GelbrichMinimum m = minimize_gelbrich(center, ref, eps);
    EXPECT_LE(gelbrich_gradient(center, m.minimizer, ref, eps).frobenius_norm(), 1e-6);
  }
}

TEST(MinimalRadiusClosedForm, Examples) {
  EXPECT_NEAR(minimal_radius_closed_form(spec(kOne, kOne, 0.0, 1.0)), kRhoMinClosed, 1e-12);
  EXPECT_NEAR(minimal_radius_closed_form(spec(kI2, kI2, 0.0, 1.0)), 2.0 * kRhoMinClosed, 1e-12);
  EXPECT_LE(std::abs(minimal_radius_closed_form(spec(kOne, kOne, 0.0, 1e-8))), 1e-6);
}

TEST(MinimalRadiusNumeric, Examples) {
  auto rng = rng_for(31);
  const SpdMatrix center = draw_spd(rng, 2, 0.3, 3.0);
  EXPECT_EQ(minimal_radius_numeric(spec(center, kI2, 0.0, 0.0)), 0.0);

  const GelbrichMinimum m = minimize_gelbrich(kOne, kOne, 1.0);
  EXPECT_NEAR(m.value, kRhoMinNumeric, 1e-9);
  EXPECT_NEAR(m.minimizer(0, 0), 7.0 / 9.0, 1e-6);
}

TEST(MinimalRadiusNumeric, NotAboveWarmStart) {
  auto rng = rng_for(32);
  for (int i = 0; i < 20; ++i) {
    const Index d = draw_dim(rng, 1, 3);
    const SpdMatrix center = draw_spd(rng, d, 0.3, 3.0);
    const SpdMatrix ref = draw_spd(rng, d, 0.3, 3.0);
    const double eps = draw(rng, 0.1, 3.0);
    const double warm =
        gelbrich_entropic(center, center + SpdMatrix::scaled_identity(d, 0.5 * eps), ref, eps);
    EXPECT_LE(minimal_radius_numeric(spec(center, ref, 0.0, eps)), warm + 1e-12);
  }
}

TEST(Validate, Examples) {
  EXPECT_TRUE(validate(spec(kI2, kI2, 1e3, 1.0)).feasible);
  const FeasibilityReport empty = validate(spec(kI2, kI2, 0.0, 1.0));
  EXPECT_FALSE(empty.feasible);
  EXPECT_NEAR(empty.rho_min_numeric, 2.0 * kRhoMinNumeric, 1e-8);
  EXPECT_NEAR(empty.rho_min_closed_form, 2.0 * kRhoMinClosed, 1e-12);
  EXPECT_TRUE(validate(spec(kI2, kI2, 0.0, 0.0)).feasible);
}

TEST(Validate, BoundaryAndMalformedSpecs) {
  const double rho = minimal_radius_numeric(spec(kOne, kOne, 0.0, 1.0));
  EXPECT_TRUE(validate(spec(kOne, kOne, rho, 1.0)).feasible);
  EXPECT_FALSE(validate(spec(kOne, kOne, rho - 1e-6, 1.0)).feasible);

  const FeasibilityReport huge = validate(spec(kOne, kOne, 1.0, 2e6));
  EXPECT_FALSE(huge.feasible);
  EXPECT_FALSE(huge.message.empty());
  EXPECT_FALSE(validate(spec(kOne, kOne, -1.0, 1.0)).feasible);
  EXPECT_FALSE(validate(spec(kOne, kI2, 1.0, 1.0)).feasible);
}

}  // namespace
}  // namespace sinkhorn_lqg
