#pragma once

#include <string>
#include <vector>

#include "sinkhorn_lqg/divergences.hpp"
#include "sinkhorn_lqg/lifted_system.hpp"

namespace sinkhorn_lqg {

/// Covariances of the exogenous blocks x0, w_0..w_{T-1}, v_0..v_{T-1}.
struct CovarianceBlocks {
  SpdMatrix X0;
  std::vector<SpdMatrix> W;
  std::vector<SpdMatrix> V;

  /// diag(X0, W_0, ..., W_{T-1})
  SpdMatrix assemble_w() const;
  /// diag(V_0, ..., V_{T-1})
  SpdMatrix assemble_v() const;

  std::size_t block_count() const { return 1 + W.size() + V.size(); }
  /// Blocks in the fixed order x0, w_0.., v_0..
  const SpdMatrix& block(std::size_t b) const;
  SpdMatrix& block(std::size_t b);
};

/// One ambiguity ball per exogenous block, same order as CovarianceBlocks.
struct AmbiguityBlocks {
  AmbiguitySpec x0;
  std::vector<AmbiguitySpec> w;
  std::vector<AmbiguitySpec> v;

  std::size_t block_count() const { return 1 + w.size() + v.size(); }
  const AmbiguitySpec& block(std::size_t b) const;
  /// "x0", "w[3]", "v[0]", ...
  std::string block_name(std::size_t b) const;
  CovarianceBlocks centers() const;
};

struct SolverOptions {
  int max_iters = 500;
  double tol_gap = 1e-4;
  /// Bisection stops once rho - G_eps(atom) <= lmo_tol * max(1, rho).
  double lmo_tol = 1e-6;
  int bisection_max = 200;
  /// Iteration cap for the numeric G_eps minimizer.
  int ascent_max = 10000;
};

struct InnerSolution {
  Policy policy;
  double value = 0.0;
  double residual = 0.0;  // relative residual of the normal equations
};

struct LmoResult {
  SpdMatrix atom;
  double value = 0.0;       // Tr(cost * atom)
  double multiplier = 0.0;  // dual multiplier lambda (0 for the degenerate branches)
  double divergence = 0.0;  // G_eps(center, atom)
  int bisections = 0;
};

struct IterationRecord {
  double dual = 0.0;    // phi(W_k, V_k)
  double primal = 0.0;  // worst-case cost of U_k
  double gap = 0.0;
  double step = 0.0;
};

struct GameSolution {
  Policy policy;
  CovarianceBlocks worst_case;
  double value = 0.0;
  double nash_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double trace_primal = 0.0;
  double trace_dual = 0.0;
  std::vector<IterationRecord> history;
};

struct WorstCase {
  CovarianceBlocks blocks;
  double value = 0.0;
};

/// Best causal linear response to Gaussian noise with covariances (W, V):
/// minimizes Tr(U^T M U S_eta) + 2 Tr(U^T H^T Q G W D^T) + Tr(G^T Q G W) over
/// the causal pattern by solving the support-restricted normal equations.
/// Throws kSingularInnerSystem if S_eta = D W D^T + V is not PD.
InnerSolution inner_lqg(const LiftedSystem& sys, const SpdMatrix& big_w,
                        const SpdMatrix& big_v);

/// Stationary point of Tr(C M) - lambda G_eps(center, M), available in closed
/// form: M = K^-1 center K^-1 + (eps/2) K^-1 with K = I + (eps/2) Sigma^-1 - C / lambda.
/// Throws kNotPd when K is not positive definite (no maximizer exists).
SpdMatrix lagrangian_maximizer(const SpdMatrix& cost, const AmbiguitySpec& spec, double lambda);

/// argmax Tr(cost * M) over the ball {M > 0 : G_eps(center, M) <= radius},
/// by bisection on the dual multiplier. The returned atom is always feasible.
LmoResult worst_case_lmo(const SpdMatrix& cost, const AmbiguitySpec& spec,
                         const SolverOptions& opts = {});

/// Frank-Wolfe on phi(W, V) = min_U Tr(F1 W + F2 V) with Danskin
/// supergradients; stops once the Nash gap drops below
/// tol_gap * max(1, |value|).
GameSolution solve_game(const LiftedSystem& sys, const AmbiguityBlocks& specs,
                        const SolverOptions& opts = {});

/// Classical LQG design for the nominal covariances.
InnerSolution nominal_lqg(const LiftedSystem& sys, const CovarianceBlocks& nominal);

/// Nature's best response to a fixed policy; exact since the cost is linear in
/// the covariances once U is fixed.
WorstCase worst_case_for_policy(const LiftedSystem& sys, const Policy& policy,
                                const AmbiguityBlocks& specs, const SolverOptions& opts = {});

/// Per-block cost matrices (diagonal blocks of F1, F2) in block order.
std::vector<SpdMatrix> block_costs(const LiftedSystem& sys, const GameMatrices& f);

/// Throws kInfeasible naming the first block whose radius is below its
/// minimal radius, or kInvalidInput / kDimMismatch for malformed specs.
void require_feasible(const LiftedSystem& sys, const AmbiguityBlocks& specs);

}  // namespace sinkhorn_lqg
