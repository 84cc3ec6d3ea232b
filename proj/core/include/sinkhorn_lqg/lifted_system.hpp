#pragma once

#include <vector>

#include "sinkhorn_lqg/spd.hpp"

namespace sinkhorn_lqg {

/// Finite-horizon linear system x_{t+1} = A_t x_t + B_t u_t + w_t,
/// y_t = C_t x_t + v_t with stage cost x_t^T Q_t x_t + u_t^T R_t u_t and
/// terminal cost x_T^T Q_T x_T.
///
/// Per-step lists: A, B, C, R have `horizon` entries; Q has horizon + 1
/// (the last one is the terminal weight).
struct SystemSpec {
  int horizon = 0;
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  std::vector<Matrix> C;
  std::vector<Matrix> Q;
  std::vector<Matrix> R;

  static SystemSpec time_invariant(int horizon, const Matrix& a, const Matrix& b,
                                   const Matrix& c, const Matrix& q, const Matrix& q_terminal,
                                   const Matrix& r);

  Index state_dim() const { return A.empty() ? 0 : A.front().rows(); }
  Index input_dim() const { return B.empty() ? 0 : B.front().cols(); }
  Index output_dim() const { return C.empty() ? 0 : C.front().rows(); }

  /// Throws kDimMismatch on inconsistent shapes, kNotPsd for a non-PSD Q_t,
  /// kNotPd for a non-PD R_t.
  void validate() const;
};

/// Stacked horizon-T representation. Exogenous ordering is
/// w = (x0, w_0, ..., w_{T-1}) and v = (v_0, ..., v_{T-1}).
struct LiftedSystem {
  int horizon = 0;
  Index state_dim = 0;
  Index input_dim = 0;
  Index output_dim = 0;

  Matrix G;  // d(T+1) x d(T+1), block (t, s) = A_{t-1} ... A_s
  Matrix H;  // d(T+1) x mT, block (t, j) = A_{t-1} ... A_{j+1} B_j for t > j
  Matrix C;  // pT x d(T+1)
  Matrix D;  // C G
  SpdMatrix Q;
  SpdMatrix R;
  SpdMatrix M;  // R + H^T Q H
  /// mT x pT; block (t, s) is free iff s <= t.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> causal_mask;

  Index w_dim() const { return state_dim * (horizon + 1); }
  Index v_dim() const { return output_dim * horizon; }
  Index u_dim() const { return input_dim * horizon; }
  bool is_free(Index row, Index col) const { return causal_mask(row, col); }
};

struct NoiseRealization {
  Vector w_stack;
  Vector v_stack;
};

/// Affine policy u = U eta + q in the purified outputs.
struct Policy {
  Matrix U;
  Vector q;
};

struct GameMatrices {
  SpdMatrix F1;  // d(T+1) x d(T+1)
  SpdMatrix F2;  // pT x pT
};

LiftedSystem build_lifted(const SystemSpec& spec);

Policy zero_policy(const LiftedSystem& sys);

/// Throws kDimMismatch on shape errors and kNotCausal if U has a nonzero
/// entry outside the causal mask.
void require_causal(const LiftedSystem& sys, const Policy& policy);

/// eta = D w + v. Depends only on the noise, never on the inputs.
Vector purified_outputs(const LiftedSystem& sys, const NoiseRealization& noise);

/// Realized cost u^T R u + x^T Q x with u = U eta + q and x = H u + G w.
double rollout_cost(const LiftedSystem& sys, const Policy& policy,
                    const NoiseRealization& noise);

GameMatrices game_matrices(const LiftedSystem& sys, const Policy& policy);

/// Tr(F1 W + F2 V) + q^T M q for noise covariances (W, V).
double expected_cost(const LiftedSystem& sys, const Policy& policy, const SpdMatrix& big_w,
                     const SpdMatrix& big_v);

}  // namespace sinkhorn_lqg
