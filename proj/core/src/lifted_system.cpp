#include "sinkhorn_lqg/lifted_system.hpp"

#include <string>

namespace sinkhorn_lqg {

namespace {

void expect_shape(const Matrix& m, Index rows, Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::kDimMismatch, what + " is " + std::to_string(m.rows()) + "x" +
                                             std::to_string(m.cols()) + ", expected " +
                                             std::to_string(rows) + "x" +
                                             std::to_string(cols));
  }
}

}  // namespace

SystemSpec SystemSpec::time_invariant(int horizon, const Matrix& a, const Matrix& b,
                                      const Matrix& c, const Matrix& q,
                                      const Matrix& q_terminal, const Matrix& r) {
  SystemSpec spec;
  spec.horizon = horizon;
  const auto n = static_cast<std::size_t>(std::max(horizon, 0));
  spec.A.assign(n, a);
  spec.B.assign(n, b);
  spec.C.assign(n, c);
  spec.Q.assign(n, q);
  spec.Q.push_back(q_terminal);
  spec.R.assign(n, r);
  return spec;
}

void SystemSpec::validate() const {
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidInput, "horizon must be >= 1");
  }
  const auto n = static_cast<std::size_t>(horizon);
  if (A.size() != n || B.size() != n || C.size() != n || R.size() != n || Q.size() != n + 1) {
    throw Error(ErrorCode::kDimMismatch,
                "per-step lists must have T entries (A, B, C, R) and T+1 entries (Q)");
  }
  const Index d = state_dim();
  const Index m = input_dim();
  const Index p = output_dim();
  if (d == 0 || m == 0 || p == 0) {
    throw Error(ErrorCode::kDimMismatch, "state, input and output dimensions must be > 0");
  }
  for (std::size_t t = 0; t < n; ++t) {
    const std::string ts = "[" + std::to_string(t) + "]";
    expect_shape(A[t], d, d, "A" + ts);
    expect_shape(B[t], d, m, "B" + ts);
    expect_shape(C[t], p, d, "C" + ts);
    expect_shape(R[t], m, m, "R" + ts);
    require_pd(SpdMatrix(R[t]), ("R" + ts).c_str());
  }
  for (std::size_t t = 0; t <= n; ++t) {
    const std::string ts = "Q[" + std::to_string(t) + "]";
    expect_shape(Q[t], d, d, ts);
    require_psd(SpdMatrix(Q[t]), ts.c_str());
  }
}

LiftedSystem build_lifted(const SystemSpec& spec) {
  spec.validate();
  const int T = spec.horizon;
  const Index d = spec.state_dim();
  const Index m = spec.input_dim();
  const Index p = spec.output_dim();

  LiftedSystem sys;
  sys.horizon = T;
  sys.state_dim = d;
  sys.input_dim = m;
  sys.output_dim = p;

  const Index nx = d * (T + 1);
  sys.G = Matrix::Zero(nx, nx);
  sys.H = Matrix::Zero(nx, m * T);
  for (int s = 0; s <= T; ++s) {
    // transition = A_{t-1} ... A_s, starting from the identity at t = s
    Matrix transition = Matrix::Identity(d, d);
    for (int t = s; t <= T; ++t) {
      sys.G.block(t * d, s * d, d, d) = transition;
      if (s >= 1) {
        // H block (t, s-1) = A_{t-1} ... A_s B_{s-1}
        sys.H.block(t * d, (s - 1) * m, d, m) = transition * spec.B[s - 1];
      }
      if (t < T) transition = spec.A[t] * transition;
    }
  }

  sys.C = Matrix::Zero(p * T, nx);
  for (int t = 0; t < T; ++t) sys.C.block(t * p, t * d, p, d) = spec.C[t];
  sys.D = sys.C * sys.G;

  std::vector<SpdMatrix> q_blocks;
  for (const auto& q : spec.Q) q_blocks.emplace_back(q);
  std::vector<SpdMatrix> r_blocks;
  for (const auto& r : spec.R) r_blocks.emplace_back(r);
  sys.Q = block_diagonal(q_blocks);
  sys.R = block_diagonal(r_blocks);
  sys.M = sys.R + congruence(sys.H, sys.Q);

  sys.causal_mask.setConstant(m * T, p * T, false);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s <= t; ++s) sys.causal_mask.block(t * m, s * p, m, p).setConstant(true);
  }
  return sys;
}

Policy zero_policy(const LiftedSystem& sys) {
  return Policy{Matrix::Zero(sys.u_dim(), sys.v_dim()), Vector::Zero(sys.u_dim())};
}

void require_causal(const LiftedSystem& sys, const Policy& policy) {
  expect_shape(policy.U, sys.u_dim(), sys.v_dim(), "policy U");
  if (policy.q.size() != sys.u_dim()) {
    throw Error(ErrorCode::kDimMismatch, "policy q has length " +
                                             std::to_string(policy.q.size()) + ", expected " +
                                             std::to_string(sys.u_dim()));
  }
  for (Index j = 0; j < policy.U.cols(); ++j) {
    for (Index i = 0; i < policy.U.rows(); ++i) {
      if (!sys.causal_mask(i, j) && policy.U(i, j) != 0.0) {
        throw Error(ErrorCode::kNotCausal, "U(" + std::to_string(i) + ", " +
                                               std::to_string(j) +
                                               ") lies outside the causal pattern");
      }
    }
  }
}

Vector purified_outputs(const LiftedSystem& sys, const NoiseRealization& noise) {
  if (noise.w_stack.size() != sys.w_dim() || noise.v_stack.size() != sys.v_dim()) {
    throw Error(ErrorCode::kDimMismatch, "noise realization does not match the lifted system");
  }
  return sys.D * noise.w_stack + noise.v_stack;
}

double rollout_cost(const LiftedSystem& sys, const Policy& policy,
                    const NoiseRealization& noise) {
  require_causal(sys, policy);
  const Vector eta = purified_outputs(sys, noise);
  const Vector u = policy.U * eta + policy.q;
  const Vector x = sys.H * u + sys.G * noise.w_stack;
  return u.dot(sys.R.matrix() * u) + x.dot(sys.Q.matrix() * x);
}

GameMatrices game_matrices(const LiftedSystem& sys, const Policy& policy) {
  require_causal(sys, policy);
  const Matrix ud = policy.U * sys.D;
  const Matrix closed = sys.H * ud + sys.G;
  return GameMatrices{congruence(ud, sys.R) + congruence(closed, sys.Q),
                      congruence(policy.U, sys.M)};
}

double expected_cost(const LiftedSystem& sys, const Policy& policy, const SpdMatrix& big_w,
                     const SpdMatrix& big_v) {
  const GameMatrices f = game_matrices(sys, policy);
  require_same_dim(f.F1, big_w, "expected_cost(W)");
  require_same_dim(f.F2, big_v, "expected_cost(V)");
  return (f.F1.matrix().cwiseProduct(big_w.matrix())).sum() +
         (f.F2.matrix().cwiseProduct(big_v.matrix())).sum() +
         policy.q.dot(sys.M.matrix() * policy.q);
}

}  // namespace sinkhorn_lqg
