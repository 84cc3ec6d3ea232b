#include "sinkhorn_lqg/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sinkhorn_lqg::oracles {

namespace {

constexpr double kSlack = 8.0 * std::numeric_limits<double>::epsilon();

bool chol_pd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

Matrix joint_covariance(const SpdMatrix& s1, const SpdMatrix& s2, const Matrix& k) {
  const Index d = s1.dim();
  Matrix j(2 * d, 2 * d);
  j << s1.matrix(), k, k.transpose(), s2.matrix();
  return j;
}

}  // namespace

SpdMatrix random_spd(std::mt19937_64& rng, Index dim, double lo, double hi) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(lo, hi);
  Matrix g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < dim; ++i) {
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  Vector ev(dim);
  for (Index i = 0; i < dim; ++i) ev(i) = uniform(rng);
  return sym_project(q * ev.asDiagonal() * q.transpose());
}

double coupling_objective(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                          const SpdMatrix& reference, double epsilon, const Matrix& cross) {
  const Matrix joint = joint_covariance(sigma1, sigma2, cross);
  if (!chol_pd(joint)) {
    throw Error(ErrorCode::kInvalidInput, "coupling: joint covariance is not PD");
  }
  const double transport = sigma1.trace() + sigma2.trace() - 2.0 * cross.trace();
  if (epsilon == 0.0) return transport;
  const SpdMatrix product = block_diagonal({sigma1, reference});
  return transport + epsilon * gaussian_kl(sym_project(joint), product);
}

CouplingOptimum coupling_descent(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                                 const SpdMatrix& reference, double epsilon, int max_iters,
                                 double gradient_tol) {
  require_same_dim(sigma1, sigma2, "coupling_descent");
  require_pd(sigma1, "coupling_descent(sigma1)");
  require_pd(sigma2, "coupling_descent(sigma2)");
  if (!(epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "coupling_descent requires epsilon > 0");
  }
  const Index d = sigma1.dim();
  const Eigen::LLT<Matrix> s1_llt(sigma1.matrix());

  // grad = -2 I + eps S1^-1 K S^-1 with S = S2 - K^T S1^-1 K
  const auto gradient = [&](const Matrix& k) {
    const Matrix schur = sigma2.matrix() - k.transpose() * s1_llt.solve(k);
    const Matrix schur_inv = Eigen::LLT<Matrix>(schur).solve(Matrix::Identity(d, d));
    return Matrix(-2.0 * Matrix::Identity(d, d) + epsilon * s1_llt.solve(k) * schur_inv);
  };
  const auto objective = [&](const Matrix& k) {
    return coupling_objective(sigma1, sigma2, reference, epsilon, k);
  };

  Matrix k = Matrix::Zero(d, d);
  double f = objective(k);
  Matrix g = gradient(k);
  double step = 1e-2;
  for (int it = 0; it < max_iters; ++it) {
    const double gnorm = g.norm();
    if (gnorm <= gradient_tol) return CouplingOptimum{k, f, it};
    double t = step;
    bool accepted = false;
    for (int bt = 0; bt < 100; ++bt, t *= 0.5) {
      const Matrix trial = k - t * g;
      if (!chol_pd(joint_covariance(sigma1, sigma2, trial))) continue;
      const double f_trial = objective(trial);
      if (f_trial <= f - 1e-4 * t * gnorm * gnorm + kSlack * std::max(1.0, std::abs(f))) {
        const Matrix g_trial = gradient(trial);
        const Matrix s = trial - k;
        const Matrix y = g_trial - g;
        const double sy = (s.array() * y.array()).sum();
        step = (sy > 0.0) ? s.squaredNorm() / sy : 2.0 * t;
        k = trial;
        f = f_trial;
        g = g_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::kNoConvergence,
                  "coupling_descent: line search stalled at gradient norm " +
                      std::to_string(gnorm));
    }
  }
  if (g.norm() <= gradient_tol) return CouplingOptimum{k, f, max_iters};
  throw Error(ErrorCode::kNoConvergence, "coupling_descent: iteration budget exhausted");
}

Decomposition decomposition_identity(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                                     const SpdMatrix& reference, double epsilon,
                                     const Matrix& cross) {
  const Matrix joint = joint_covariance(sigma1, sigma2, cross);
  if (!chol_pd(joint)) {
    throw Error(ErrorCode::kInvalidInput, "decomposition_identity: infeasible coupling");
  }
  const GaussianCoupling optimal = optimal_coupling(sigma1, sigma2, epsilon);
  Decomposition out;
  out.lhs = coupling_objective(sigma1, sigma2, reference, epsilon, cross);
  out.kl_to_optimal = gaussian_kl(sym_project(joint), optimal.joint());
  out.rhs = gelbrich_entropic(sigma1, sigma2, reference, epsilon) + epsilon * out.kl_to_optimal;
  return out;
}

double fd_gradient_check(const MatrixFunction& fn, const MatrixGradient& grad,
                         const SpdMatrix& point, double step) {
  const SpdMatrix analytic = grad(point);
  const Index d = point.dim();
  const double scale = analytic.matrix().cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      const SpdMatrix dir(e);
      const double fd = (fn(point + step * dir) - fn(point - step * dir)) / (2.0 * step);
      const double an = (i == j) ? analytic(i, i) : 2.0 * analytic(i, j);
      const double denom = std::max({std::abs(an), 1e-2 * scale, 1e-12});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

SpdMatrix lagrangian_ascent(const SpdMatrix& cost, const AmbiguitySpec& spec, double lambda,
                            int max_iters, double gradient_tol) {
  const auto objective = [&](const SpdMatrix& m) {
    return (cost.matrix().cwiseProduct(m.matrix())).sum() -
           lambda * gelbrich_entropic(spec.center, m, spec.reference, spec.epsilon);
  };
  const auto gradient = [&](const SpdMatrix& m) {
    return cost - lambda * gelbrich_gradient(spec.center, m, spec.reference, spec.epsilon);
  };
  const double tol = gradient_tol * std::max(1.0, cost.frobenius_norm());
  const double floor = 1e-12 * std::max(1.0, spec.center.trace());

  SpdMatrix m = spec.center;
  double f = objective(m);
  SpdMatrix g = gradient(m);
  double step = 1.0 / std::max(1.0, lambda);
  for (int it = 0; it < max_iters; ++it) {
    const double gnorm = g.frobenius_norm();
    if (gnorm <= tol) return m;
    double t = step;
    bool accepted = false;
    for (int bt = 0; bt < 100; ++bt, t *= 0.5) {
      const Matrix raw = m.matrix() + t * g.matrix();
      if (!chol_pd(raw)) continue;
      const SpdMatrix trial = psd_floor(sym_project(raw), floor);
      const double f_trial = objective(trial);
      if (f_trial >= f + 1e-4 * t * gnorm * gnorm - kSlack * std::max(1.0, std::abs(f))) {
        const SpdMatrix g_trial = gradient(trial);
        const Matrix s = trial.matrix() - m.matrix();
        const Matrix y = g.matrix() - g_trial.matrix();
        const double sy = (s.array() * y.array()).sum();
        step = (sy > 0.0) ? s.squaredNorm() / sy : 2.0 * t;
        m = trial;
        f = f_trial;
        g = g_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (g.frobenius_norm() <= tol) return m;
  throw Error(ErrorCode::kNoConvergence,
              "lagrangian_ascent: stalled at gradient norm " + std::to_string(g.frobenius_norm()));
}

double scalar_gelbrich(double sigma1, double sigma2, double reference, double epsilon) {
  const double cross = sigma1 * sigma2;
  if (epsilon == 0.0) return sigma1 + sigma2 - 2.0 * std::sqrt(cross);
  const double d_eps = std::sqrt(cross + epsilon * epsilon / 16.0);
  return sigma1 + sigma2 - 2.0 * d_eps +
         0.5 * epsilon *
             (sigma2 / reference + std::log(reference / sigma2) + std::log(2.0 / epsilon) +
              std::log(d_eps + epsilon / 4.0));
}

ScalarMinimum rho_min_scalar(double sigma_hat, double reference, double epsilon) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 1e-6;
  double b = 10.0 * (sigma_hat + epsilon);
  const auto g = [&](double s) { return scalar_gelbrich(sigma_hat, s, reference, epsilon); };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (b - a > 1e-10) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  const double s = 0.5 * (a + b);
  return ScalarMinimum{g(s), s};
}

std::pair<double, double> scalar_feasible_interval(double sigma_hat, double reference,
                                                   double epsilon, double radius) {
  const ScalarMinimum best = rho_min_scalar(sigma_hat, reference, epsilon);
  if (best.value > radius + 1e-12) {
    throw Error(ErrorCode::kInfeasible, "scalar ball is empty");
  }
  const auto g = [&](double s) { return scalar_gelbrich(sigma_hat, s, reference, epsilon); };
  const auto root = [&](double inside, double outside) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (inside + outside);
      if (g(mid) <= radius) inside = mid; else outside = mid;
    }
    return inside;
  };
  double lo = 0.0;
  double hi = best.argmin;
  if (g(1e-300) > radius) lo = root(best.argmin, 1e-300);
  else lo = 1e-300;
  double far = std::max(1.0, 2.0 * best.argmin);
  while (g(far) <= radius) far *= 2.0;
  hi = root(best.argmin, far);
  if (radius - best.value <= 1e-12) lo = hi = best.argmin;
  return {lo, hi};
}

SystemSpec ScalarGame::system() const {
  const auto one = [](double v) { return Matrix::Constant(1, 1, v); };
  return SystemSpec::time_invariant(1, one(a), one(b), one(c), one(q0), one(q1), one(r));
}

AmbiguityBlocks ScalarGame::ambiguity() const {
  const auto ball = [&](double center, double rho) {
    return AmbiguitySpec{SpdMatrix::diagonal({center}), SpdMatrix::diagonal({reference}), rho,
                         epsilon};
  };
  return AmbiguityBlocks{ball(x0_hat, rho_x0), {ball(w0_hat, rho_w0)}, {ball(v0_hat, rho_v0)}};
}

double scalar_game_cost(const ScalarGame& g, double gain, double x0, double w0, double v0) {
  return gain * gain * (g.r + g.q1 * g.b * g.b) * (g.c * g.c * x0 + v0) +
         2.0 * g.q1 * g.a * g.b * g.c * gain * x0 + g.q0 * x0 + g.q1 * (g.a * g.a * x0 + w0);
}

BruteGameResult brute_game(const ScalarGame& game, int grid) {
  const auto axis = [&](double center, double rho) {
    const auto [lo, hi] = scalar_feasible_interval(center, game.reference, game.epsilon, rho);
    std::vector<double> points;
    const double pad = 0.01 * (hi - lo);
    const double a = std::max(lo - pad, 1e-12);
    const double b = hi + pad;
    for (int i = 0; i < grid; ++i) {
      const double s = (grid == 1) ? lo : a + (b - a) * i / (grid - 1.0);
      if (s >= lo && s <= hi) points.push_back(s);
    }
    points.push_back(lo);
    points.push_back(hi);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return std::pair{points, (grid > 1) ? (b - a) / (grid - 1.0) : 0.0};
  };
  const auto [xs, hx] = axis(game.x0_hat, game.rho_x0);
  const auto [ws, hw] = axis(game.w0_hat, game.rho_w0);
  const auto [vs, hv] = axis(game.v0_hat, game.rho_v0);

  BruteGameResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.cell_x0 = hx;
  best.cell_w0 = hw;
  best.cell_v0 = hv;
  const double curvature = game.r + game.q1 * game.b * game.b;
  for (double x0 : xs) {
    for (double w0 : ws) {
      for (double v0 : vs) {
        const double gain = -game.q1 * game.a * game.b * game.c * x0 /
                            (curvature * (game.c * game.c * x0 + v0));
        const double value = scalar_game_cost(game, gain, x0, w0, v0);
        // Strict improvement keeps the lexicographically first maximizer.
        if (value > best.value) {
          best.value = value;
          best.gain = gain;
          best.x0 = x0;
          best.w0 = w0;
          best.v0 = v0;
        }
      }
    }
  }
  return best;
}

double recursive_cost(const SystemSpec& spec, const Policy& policy,
                      const NoiseRealization& noise) {
  spec.validate();
  const int T = spec.horizon;
  const Index d = spec.state_dim();
  const Index m = spec.input_dim();
  const Index p = spec.output_dim();

  Vector x = noise.w_stack.segment(0, d);
  Vector x_free = Vector::Zero(d);
  std::vector<Vector> eta;
  double cost = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vector y = spec.C[t] * x + noise.v_stack.segment(t * p, p);
    const Vector y_free = spec.C[t] * x_free;
    eta.push_back(y - y_free);
    Vector u = policy.q.segment(t * m, m);
    for (int s = 0; s <= t; ++s) u += policy.U.block(t * m, s * p, m, p) * eta[s];
    cost += x.dot(spec.Q[t] * x) + u.dot(spec.R[t] * u);
    x = spec.A[t] * x + spec.B[t] * u + noise.w_stack.segment((t + 1) * d, d);
    x_free = spec.A[t] * x_free + spec.B[t] * u;
  }
  return cost + x.dot(spec.Q[T] * x);
}

}  // namespace sinkhorn_lqg::oracles
