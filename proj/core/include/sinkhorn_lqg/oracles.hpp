#pragma once

#include <functional>
#include <random>
#include <utility>

#include "sinkhorn_lqg/dr_solver.hpp"
#include "sinkhorn_lqg/lifted_system.hpp"

// Brute-force verifiers. Each one takes a separate code path from the routine
// it checks: nothing here calls gelbrich_entropic or worst_case_lmo except to
// compare against it.
namespace sinkhorn_lqg::oracles {

/// Random symmetric matrix with eigenvalues uniform in [lo, hi] and a Haar
/// distributed eigenbasis.
SpdMatrix random_spd(std::mt19937_64& rng, Index dim, double lo, double hi);

// -- Couplings ---------------------------------------------------------------

/// Tr S1 + Tr S2 - 2 Tr K + eps * KL(N(0, [[S1, K], [K^T, S2]]) || N(0, S1) x N(0, ref)).
double coupling_objective(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                          const SpdMatrix& reference, double epsilon, const Matrix& cross);

struct CouplingOptimum {
  Matrix cross;
  double value = 0.0;
  int iterations = 0;
};

/// Minimizes coupling_objective over feasible cross-covariances by gradient
/// descent from K = 0 (Armijo backtracking that rejects non-PD joints).
CouplingOptimum coupling_descent(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                                 const SpdMatrix& reference, double epsilon,
                                 int max_iters = 200000, double gradient_tol = 1e-8);

struct Decomposition {
  double lhs = 0.0;  // coupling objective at K
  double rhs = 0.0;  // G_eps + eps * KL(gamma(K) || gamma_0)
  double kl_to_optimal = 0.0;
};

/// Throws kInvalidInput when the joint covariance for K is not PD.
Decomposition decomposition_identity(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                                     const SpdMatrix& reference, double epsilon,
                                     const Matrix& cross);

// -- Gradients ---------------------------------------------------------------

using MatrixFunction = std::function<double(const SpdMatrix&)>;
using MatrixGradient = std::function<SpdMatrix(const SpdMatrix&)>;

/// Central differences along the symmetric basis E_ii, E_ij + E_ji. Returns
/// max |fd - analytic| / max(|analytic|, 1e-2 ||grad||_max, 1e-12).
double fd_gradient_check(const MatrixFunction& fn, const MatrixGradient& grad,
                         const SpdMatrix& point, double step);

/// Gradient ascent on Tr(C M) - lambda G_eps(center, M) from the center,
/// with Armijo backtracking and a PD floor on iterates.
SpdMatrix lagrangian_ascent(const SpdMatrix& cost, const AmbiguitySpec& spec, double lambda,
                            int max_iters = 100000, double gradient_tol = 1e-10);

// -- Scalar references -------------------------------------------------------

/// G_eps for 1x1 covariances, written out by hand.
double scalar_gelbrich(double sigma1, double sigma2, double reference, double epsilon);

struct ScalarMinimum {
  double value = 0.0;
  double argmin = 0.0;
};

/// Golden-section minimization of s -> scalar_gelbrich(sigma_hat, s) over
/// [1e-6, 10 (sigma_hat + eps)].
ScalarMinimum rho_min_scalar(double sigma_hat, double reference, double epsilon);

/// [lo, hi] = { s : scalar_gelbrich(sigma_hat, s) <= radius } by bisection.
std::pair<double, double> scalar_feasible_interval(double sigma_hat, double reference,
                                                   double epsilon, double radius);

/// x1 = a x0 + b u0 + w0, y0 = c x0 + v0, cost q0 x0^2 + r u0^2 + q1 x1^2.
struct ScalarGame {
  double a = 1.0, b = 1.0, c = 1.0;
  double q0 = 1.0, q1 = 1.0, r = 1.0;
  double x0_hat = 1.0, w0_hat = 1.0, v0_hat = 1.0;
  double reference = 1.0;
  double epsilon = 1.0;
  double rho_x0 = 2.0, rho_w0 = 2.0, rho_v0 = 2.0;

  SystemSpec system() const;
  AmbiguityBlocks ambiguity() const;
};

struct BruteGameResult {
  double value = 0.0;
  double gain = 0.0;
  double x0 = 0.0, w0 = 0.0, v0 = 0.0;
  double cell_x0 = 0.0, cell_w0 = 0.0, cell_v0 = 0.0;  // grid spacing per block
};

/// Exhaustive max-min over a grid of feasible (X0, W0, V0), minimizing over
/// the scalar gain in closed form.
BruteGameResult brute_game(const ScalarGame& game, int grid = 100);

/// Expected cost of u0 = k * eta0 for the scalar game, expanded by hand.
double scalar_game_cost(const ScalarGame& game, double gain, double x0, double w0, double v0);

// -- Dynamics ----------------------------------------------------------------

/// Step-by-step recursion of the plant and its noise-free copy, with
/// u_t = sum_{s <= t} U_ts eta_s + q_t.
double recursive_cost(const SystemSpec& spec, const Policy& policy,
                      const NoiseRealization& noise);

}  // namespace sinkhorn_lqg::oracles
