#include "sinkhorn_lqg/dr_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace sinkhorn_lqg {

namespace {

double frob_dot(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

bool chol_pd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

SpdMatrix diagonal_block(const SpdMatrix& m, Index offset, Index size) {
  return sym_project(m.matrix().block(offset, offset, size, size));
}

// Degenerate balls where the feasible set collapses onto the G_eps minimizer.
bool ball_is_point(double radius, double rho_min, double tol) { return radius - rho_min <= tol; }

}  // namespace

// ---------------------------------------------------------------------------
// Block containers

SpdMatrix CovarianceBlocks::assemble_w() const {
  std::vector<SpdMatrix> blocks;
  blocks.reserve(W.size() + 1);
  blocks.push_back(X0);
  blocks.insert(blocks.end(), W.begin(), W.end());
  return block_diagonal(blocks);
}

SpdMatrix CovarianceBlocks::assemble_v() const { return block_diagonal(V); }

const SpdMatrix& CovarianceBlocks::block(std::size_t b) const {
  if (b == 0) return X0;
  if (b <= W.size()) return W[b - 1];
  return V.at(b - 1 - W.size());
}

SpdMatrix& CovarianceBlocks::block(std::size_t b) {
  return const_cast<SpdMatrix&>(std::as_const(*this).block(b));
}

const AmbiguitySpec& AmbiguityBlocks::block(std::size_t b) const {
  if (b == 0) return x0;
  if (b <= w.size()) return w[b - 1];
  return v.at(b - 1 - w.size());
}

std::string AmbiguityBlocks::block_name(std::size_t b) const {
  if (b == 0) return "x0";
  if (b <= w.size()) return "w[" + std::to_string(b - 1) + "]";
  return "v[" + std::to_string(b - 1 - w.size()) + "]";
}

CovarianceBlocks AmbiguityBlocks::centers() const {
  CovarianceBlocks c;
  c.X0 = x0.center;
  for (const auto& s : w) c.W.push_back(s.center);
  for (const auto& s : v) c.V.push_back(s.center);
  return c;
}

// ---------------------------------------------------------------------------
// Inner LQG

InnerSolution inner_lqg(const LiftedSystem& sys, const SpdMatrix& big_w,
                        const SpdMatrix& big_v) {
  if (big_w.dim() != sys.w_dim() || big_v.dim() != sys.v_dim()) {
    throw Error(ErrorCode::kDimMismatch, "inner_lqg: covariance sizes do not match the system");
  }
  const Matrix sigma_eta = sys.D * big_w.matrix() * sys.D.transpose() + big_v.matrix();
  if (!chol_pd(sigma_eta)) {
    throw Error(ErrorCode::kSingularInnerSystem,
                "covariance of the purified outputs is not positive definite");
  }
  const Matrix linear =
      sys.H.transpose() * sys.Q.matrix() * sys.G * big_w.matrix() * sys.D.transpose();

  // Free entries of U in column-major order.
  std::vector<std::pair<Index, Index>> free;
  for (Index j = 0; j < sys.causal_mask.cols(); ++j) {
    for (Index i = 0; i < sys.causal_mask.rows(); ++i) {
      if (sys.causal_mask(i, j)) free.emplace_back(i, j);
    }
  }
  const auto n = static_cast<Index>(free.size());
  const Matrix& m = sys.M.matrix();

  // Row (i, j), column (k, l): M(i, k) * S_eta(l, j).
  Matrix normal(n, n);
  Vector rhs(n);
  for (Index a = 0; a < n; ++a) {
    const auto [i, j] = free[static_cast<std::size_t>(a)];
    rhs(a) = -linear(i, j);
    for (Index b = 0; b <= a; ++b) {
      const auto [k, l] = free[static_cast<std::size_t>(b)];
      normal(a, b) = m(i, k) * sigma_eta(l, j);
    }
  }
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();

  InnerSolution out;
  out.policy = zero_policy(sys);
  if (rhs.norm() > 0.0) {
    Eigen::LLT<Matrix> llt(normal);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularInnerSystem, "restricted normal equations are singular");
    }
    const Vector sol = llt.solve(rhs);
    out.residual = (normal * sol - rhs).norm() / rhs.norm();
    for (Index a = 0; a < n; ++a) {
      const auto [i, j] = free[static_cast<std::size_t>(a)];
      out.policy.U(i, j) = sol(a);
    }
  }
  out.value = expected_cost(sys, out.policy, big_w, big_v);
  return out;
}

InnerSolution nominal_lqg(const LiftedSystem& sys, const CovarianceBlocks& nominal) {
  return inner_lqg(sys, nominal.assemble_w(), nominal.assemble_v());
}

// ---------------------------------------------------------------------------
// Linear maximization over a G_eps ball

SpdMatrix lagrangian_maximizer(const SpdMatrix& cost, const AmbiguitySpec& spec,
                               double lambda) {
  const Index d = spec.dim();
  Matrix k = Matrix::Identity(d, d) - cost.matrix() / lambda;
  if (spec.epsilon > 0.0) k += 0.5 * spec.epsilon * spd_inv(spec.reference).matrix();
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPd, "lagrangian_maximizer: multiplier below the critical value");
  }
  const Matrix k_inv = llt.solve(Matrix::Identity(d, d));
  return sym_project(k_inv * spec.center.matrix() * k_inv + 0.5 * spec.epsilon * k_inv);
}

LmoResult worst_case_lmo(const SpdMatrix& cost, const AmbiguitySpec& spec,
                         const SolverOptions& opts) {
  check_spec_well_formed(spec);
  require_same_dim(cost, spec.center, "worst_case_lmo");
  const double tol = opts.lmo_tol * std::max(1.0, spec.radius);
  const auto divergence = [&](const SpdMatrix& m) {
    return gelbrich_entropic(spec.center, m, spec.reference, spec.epsilon);
  };

  if (cost.frobenius_norm() <= 1e-12) {
    const GelbrichMinimum gm = minimize_gelbrich(spec.center, spec.reference, spec.epsilon,
                                                 opts.ascent_max);
    if (gm.value > spec.radius + 1e-9) {
      throw Error(ErrorCode::kInfeasible, "worst_case_lmo: radius below the minimal radius");
    }
    return LmoResult{gm.minimizer, 0.0, 0.0, gm.value, 0};
  }

  // As lambda -> infinity the maximizer tends to the G_eps minimizer.
  const SpdMatrix at_infinity = lagrangian_maximizer(SpdMatrix::zero(spec.dim()), spec, 1.0);
  const double rho_min = divergence(at_infinity);
  if (rho_min > spec.radius + 1e-9) {
    throw Error(ErrorCode::kInfeasible, "worst_case_lmo: radius " +
                                            std::to_string(spec.radius) +
                                            " below the minimal radius " +
                                            std::to_string(rho_min));
  }
  if (ball_is_point(spec.radius, rho_min, tol)) {
    return LmoResult{at_infinity, frob_dot(cost.matrix(), at_infinity.matrix()), 0.0, rho_min,
                     0};
  }

  // K = P - C / lambda is PD iff lambda > lambda_max(P^-1/2 C P^-1/2).
  Matrix p = Matrix::Identity(spec.dim(), spec.dim());
  if (spec.epsilon > 0.0) p += 0.5 * spec.epsilon * spd_inv(spec.reference).matrix();
  const SpdMatrix p_inv_sqrt = spd_inv_sqrt(sym_project(p));
  const double critical =
      std::max(0.0, eigenvalues(congruence(p_inv_sqrt.matrix(), cost)).maxCoeff());

  // Returns G_eps(center, M(lambda)) - radius, +inf where K is not PD.
  SpdMatrix atom;
  const auto excess = [&](double lambda, SpdMatrix* out) {
    try {
      SpdMatrix m = lagrangian_maximizer(cost, spec, lambda);
      const double g = divergence(m);
      if (out) *out = std::move(m);
      return g - spec.radius;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const double scale = std::max(1.0, critical);
  double lo = std::max(1e-12, critical);
  double hi = std::max(1.0, 2.0 * critical);
  double hi_excess = excess(hi, &atom);
  while (!(hi_excess <= 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12 * scale) {
      throw Error(ErrorCode::kBracketFailure,
                  "worst_case_lmo: no feasible multiplier below 1e12");
    }
    hi_excess = excess(hi, &atom);
  }

  int it = 0;
  for (; it < opts.bisection_max && hi_excess < -tol; ++it) {
    if (hi - lo <= 1e-15 * hi) break;
    const double mid = (hi > 4.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    SpdMatrix candidate;
    const double e = excess(mid, &candidate);
    if (e <= 0.0) {
      hi = mid;
      hi_excess = e;
      atom = std::move(candidate);
    } else {
      lo = mid;
    }
  }
  if (hi_excess < -tol && !(hi - lo <= 1e-15 * hi)) {
    throw Error(ErrorCode::kNoConvergence,
                "worst_case_lmo: bisection budget exhausted with slack " +
                    std::to_string(-hi_excess));
  }
  return LmoResult{atom, frob_dot(cost.matrix(), atom.matrix()), hi, hi_excess + spec.radius,
                   it};
}

// ---------------------------------------------------------------------------
// Saddle-point solver

std::vector<SpdMatrix> block_costs(const LiftedSystem& sys, const GameMatrices& f) {
  std::vector<SpdMatrix> costs;
  const Index d = sys.state_dim;
  const Index p = sys.output_dim;
  for (int t = 0; t <= sys.horizon; ++t) costs.push_back(diagonal_block(f.F1, t * d, d));
  for (int t = 0; t < sys.horizon; ++t) costs.push_back(diagonal_block(f.F2, t * p, p));
  return costs;
}

void require_feasible(const LiftedSystem& sys, const AmbiguityBlocks& specs) {
  const auto T = static_cast<std::size_t>(sys.horizon);
  if (specs.w.size() != T || specs.v.size() != T) {
    throw Error(ErrorCode::kDimMismatch, "ambiguity blocks must list T process and T "
                                         "measurement noise balls");
  }
  for (std::size_t b = 0; b < specs.block_count(); ++b) {
    const AmbiguitySpec& s = specs.block(b);
    const Index expected = (b <= T) ? sys.state_dim : sys.output_dim;
    if (s.dim() != expected) {
      throw Error(ErrorCode::kDimMismatch, "ambiguity block " + specs.block_name(b) +
                                               " has the wrong dimension");
    }
    check_spec_well_formed(s);
    const FeasibilityReport r = validate(s);
    if (!r.feasible) {
      throw Error(ErrorCode::kInfeasible,
                  "block " + specs.block_name(b) + ": radius " + std::to_string(s.radius) +
                      " below minimal radius " + std::to_string(r.rho_min_numeric));
    }
  }
}

namespace {

struct Iterate {
  CovarianceBlocks blocks;
  InnerSolution inner;
};

Iterate evaluate(const LiftedSystem& sys, CovarianceBlocks blocks) {
  InnerSolution inner = inner_lqg(sys, blocks.assemble_w(), blocks.assemble_v());
  return Iterate{std::move(blocks), std::move(inner)};
}

CovarianceBlocks interpolate(const CovarianceBlocks& from, const std::vector<SpdMatrix>& to,
                             double step) {
  CovarianceBlocks out = from;
  for (std::size_t b = 0; b < out.block_count(); ++b) {
    out.block(b) = (1.0 - step) * from.block(b) + step * to[b];
  }
  return out;
}

}  // namespace

GameSolution solve_game(const LiftedSystem& sys, const AmbiguityBlocks& specs,
                        const SolverOptions& opts) {
  require_feasible(sys, specs);

  // Start from the centers when they lie in their balls, else from the
  // G_eps minimizers (always feasible).
  CovarianceBlocks start = specs.centers();
  for (std::size_t b = 0; b < specs.block_count(); ++b) {
    const AmbiguitySpec& s = specs.block(b);
    if (gelbrich_entropic(s.center, s.center, s.reference, s.epsilon) > s.radius) {
      start.block(b) = minimize_gelbrich(s.center, s.reference, s.epsilon, opts.ascent_max)
                           .minimizer;
    }
  }
  Iterate current = evaluate(sys, std::move(start));

  GameSolution best;
  bool have_best = false;
  const auto record = [&](const Iterate& it, double primal, int k, bool converged) {
    GameSolution s;
    s.policy = it.inner.policy;
    s.worst_case = it.blocks;
    s.trace_primal = primal;
    s.trace_dual = it.inner.value;
    s.nash_gap = primal - it.inner.value;
    s.value = primal;
    s.iterations = k;
    s.converged = converged;
    return s;
  };

  std::vector<IterationRecord> history;
  for (int k = 0;; ++k) {
    const GameMatrices f = game_matrices(sys, current.inner.policy);
    const std::vector<SpdMatrix> costs = block_costs(sys, f);

    std::vector<SpdMatrix> atoms;
    atoms.reserve(costs.size());
    double primal = current.inner.policy.q.dot(sys.M.matrix() * current.inner.policy.q);
    for (std::size_t b = 0; b < costs.size(); ++b) {
      LmoResult lmo = worst_case_lmo(costs[b], specs.block(b), opts);
      // The current block is feasible too, so it is also a valid lower bound
      // on the block maximum.
      const double here = frob_dot(costs[b].matrix(), current.blocks.block(b).matrix());
      primal += std::max(lmo.value, here);
      atoms.push_back(std::move(lmo.atom));
    }
    const double dual = current.inner.value;
    const double gap = primal - dual;
    const bool converged = gap <= opts.tol_gap * std::max(1.0, std::abs(primal));
    history.push_back(IterationRecord{dual, primal, gap, 0.0});

    if (!have_best || gap < best.nash_gap || converged) {
      best = record(current, primal, k, converged);
      have_best = true;
    }
    if (converged || k >= opts.max_iters) break;

    // Frank-Wolfe step 2/(k+2), halved while it would decrease phi.
    double step = 2.0 / (k + 2.0);
    Iterate next = evaluate(sys, interpolate(current.blocks, atoms, step));
    const double floor = dual - 1e-10 * std::max(1.0, std::abs(dual));
    for (int bt = 0; bt < 30 && next.inner.value < floor; ++bt) {
      step *= 0.5;
      next = evaluate(sys, interpolate(current.blocks, atoms, step));
    }
    if (next.inner.value < floor) {
      step = 0.0;
      next = current;
    }
    history.back().step = step;
    current = std::move(next);
  }
  best.history = std::move(history);
  best.iterations = static_cast<int>(best.history.size()) - 1;
  return best;
}

WorstCase worst_case_for_policy(const LiftedSystem& sys, const Policy& policy,
                                const AmbiguityBlocks& specs, const SolverOptions& opts) {
  require_feasible(sys, specs);
  const GameMatrices f = game_matrices(sys, policy);
  const std::vector<SpdMatrix> costs = block_costs(sys, f);
  WorstCase out;
  out.blocks = specs.centers();
  for (std::size_t b = 0; b < costs.size(); ++b) {
    out.blocks.block(b) = worst_case_lmo(costs[b], specs.block(b), opts).atom;
  }
  out.value = expected_cost(sys, policy, out.blocks.assemble_w(), out.blocks.assemble_v());
  return out;
}

}  // namespace sinkhorn_lqg
