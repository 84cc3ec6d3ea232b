#pragma once

#include <string>

#include "sinkhorn_lqg/spd.hpp"

namespace sinkhorn_lqg {

/// One Sinkhorn ambiguity ball around N(0, center), regularized against the
/// reference measure N(0, reference).
struct AmbiguitySpec {
  SpdMatrix center;
  SpdMatrix reference;
  double radius = 0.0;
  double epsilon = 0.0;

  Index dim() const { return center.dim(); }
};

/// Joint zero-mean Gaussian with covariance [[sigma1, cross], [cross^T, sigma2]].
struct GaussianCoupling {
  SpdMatrix sigma1;
  SpdMatrix sigma2;
  Matrix cross;

  SpdMatrix joint() const;
  /// Schur complement sigma2 - cross^T sigma1^-1 cross.
  SpdMatrix schur_complement() const;
  bool is_feasible(double tol = 1e-10) const;
};

struct FeasibilityReport {
  bool feasible = false;
  double rho_min_numeric = 0.0;
  double rho_min_closed_form = 0.0;
  double radius = 0.0;
  // Set when the spec itself is malformed.
  std::string message;
};

struct GelbrichMinimum {
  SpdMatrix minimizer;
  double value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Largest regularization accepted anywhere in the toolkit. Beyond this the
/// ambiguity ball degenerates (empty or a single point) and is rejected.
inline constexpr double kMaxEpsilon = 1e6;

/// KL(N(0, a) || N(0, b)).
double gaussian_kl(const SpdMatrix& a, const SpdMatrix& b);

/// Entropy-regularized Gelbrich divergence G_eps(sigma1, sigma2) with
/// reference N(0, reference). For epsilon == 0 this is the squared Gelbrich
/// (Bures-Wasserstein) distance.
double gelbrich_entropic(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                         const SpdMatrix& reference, double epsilon);

/// Sinkhorn discrepancy between N(0, sigma1) and N(0, sigma2). Equal to
/// gelbrich_entropic: the entropic optimal plan between Gaussians is Gaussian.
double sinkhorn_gaussian(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                         const SpdMatrix& reference, double epsilon);

/// Cross-covariance sigma1 * X_eps of the optimal entropic coupling, where
/// X_eps = S1^-1/2 (S1^1/2 S2 S1^1/2 + eps^2/16 I)^1/2 S1^-1/2 - (eps/4) S1^-1.
Matrix optimal_coupling_cross(const SpdMatrix& sigma1, const SpdMatrix& sigma2, double epsilon);
GaussianCoupling optimal_coupling(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                                  double epsilon);

/// Gradient of G_eps with respect to its second argument.
SpdMatrix gelbrich_gradient(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                            const SpdMatrix& reference, double epsilon);

/// Closed-form minimal radius
/// eps/2 (Tr(Sigma^-1 (center + eps/2 I)) - d + log|Sigma| - d log(eps/2)).
/// Reported for comparison only; validate() uses the numeric minimum.
double minimal_radius_closed_form(const AmbiguitySpec& spec);

/// min over Sigma2 > 0 of G_eps(center, Sigma2) by gradient descent from
/// center + (eps/2) I with Armijo backtracking and Barzilai-Borwein trial
/// steps, stopping at ||grad||_F <= gradient_tol.
GelbrichMinimum minimize_gelbrich(const SpdMatrix& center, const SpdMatrix& reference,
                                  double epsilon, int max_iters = 10000,
                                  double gradient_tol = 1e-8);

double minimal_radius_numeric(const AmbiguitySpec& spec);

FeasibilityReport validate(const AmbiguitySpec& spec);

/// Throws kInvalidInput / kNotPd / kDimMismatch on malformed specs.
void check_spec_well_formed(const AmbiguitySpec& spec);

}  // namespace sinkhorn_lqg
