#include "sinkhorn_lqg/divergences.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sinkhorn_lqg {

namespace {

// Spectrum of S = sigma1^1/2 sigma2 sigma1^1/2 together with sigma1^1/2.
struct InnerSpectrum {
  SpdMatrix root1;
  Vector values;
  Matrix vectors;
};

InnerSpectrum inner_spectrum(const SpdMatrix& sigma1, const SpdMatrix& sigma2) {
  InnerSpectrum out;
  out.root1 = spd_sqrt(sigma1);
  const SpdMatrix inner = congruence(out.root1.matrix(), sigma2);
  Eigen::SelfAdjointEigenSolver<Matrix> es(inner.matrix());
  out.values = es.eigenvalues().cwiseMax(0.0);
  out.vectors = es.eigenvectors();
  return out;
}

double trace_of_solve(const SpdMatrix& a, const SpdMatrix& b) {
  // Tr(a^-1 b) for PD a.
  Eigen::LLT<Matrix> llt(a.matrix());
  return llt.solve(b.matrix()).trace();
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidInput,
                "epsilon must be finite and >= 0, got " + std::to_string(epsilon));
  }
}

}  // namespace

SpdMatrix GaussianCoupling::joint() const {
  const Index d = sigma1.dim();
  Matrix j(2 * d, 2 * d);
  j.topLeftCorner(d, d) = sigma1.matrix();
  j.topRightCorner(d, d) = cross;
  j.bottomLeftCorner(d, d) = cross.transpose();
  j.bottomRightCorner(d, d) = sigma2.matrix();
  return sym_project(j);
}

SpdMatrix GaussianCoupling::schur_complement() const {
  Eigen::LLT<Matrix> llt(sigma1.matrix());
  return sym_project(sigma2.matrix() - cross.transpose() * llt.solve(cross));
}

bool GaussianCoupling::is_feasible(double tol) const {
  return min_eigenvalue(schur_complement()) >= -tol;
}

double gaussian_kl(const SpdMatrix& a, const SpdMatrix& b) {
  require_same_dim(a, b, "gaussian_kl");
  require_psd(a, "gaussian_kl(a)");
  require_pd(b, "gaussian_kl(b)");
  const double d = static_cast<double>(a.dim());
  if (!is_pd(a)) return std::numeric_limits<double>::infinity();
  const double kl = 0.5 * (trace_of_solve(b, a) - d + spd_logdet(b) - spd_logdet(a));
  return std::max(kl, 0.0);
}

double gelbrich_entropic(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                         const SpdMatrix& reference, double epsilon) {
  check_epsilon(epsilon);
  require_same_dim(sigma1, sigma2, "gelbrich_entropic");
  if (epsilon == 0.0) {
    require_psd(sigma1, "gelbrich_entropic(sigma1)");
    require_psd(sigma2, "gelbrich_entropic(sigma2)");
    const InnerSpectrum sp = inner_spectrum(sigma1, sigma2);
    return sigma1.trace() + sigma2.trace() - 2.0 * sp.values.array().sqrt().sum();
  }
  require_same_dim(sigma1, reference, "gelbrich_entropic");
  require_pd(sigma1, "gelbrich_entropic(sigma1)");
  require_pd(sigma2, "gelbrich_entropic(sigma2)");
  require_pd(reference, "gelbrich_entropic(reference)");

  const double d = static_cast<double>(sigma1.dim());
  const double c = epsilon / 4.0;
  const InnerSpectrum sp = inner_spectrum(sigma1, sigma2);
  const Eigen::ArrayXd dvals = (sp.values.array() + c * c).sqrt();

  const double transport = sigma1.trace() + sigma2.trace() - 2.0 * dvals.sum();
  const double entropic = trace_of_solve(reference, sigma2) + spd_logdet(reference) -
                          spd_logdet(sigma2) + d * std::log(2.0 / epsilon) +
                          (dvals + c).log().sum();
  return transport + 0.5 * epsilon * entropic;
}

double sinkhorn_gaussian(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                         const SpdMatrix& reference, double epsilon) {
  return gelbrich_entropic(sigma1, sigma2, reference, epsilon);
}

Matrix optimal_coupling_cross(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                              double epsilon) {
  check_epsilon(epsilon);
  require_same_dim(sigma1, sigma2, "optimal_coupling_cross");
  require_pd(sigma1, "optimal_coupling_cross(sigma1)");
  require_pd(sigma2, "optimal_coupling_cross(sigma2)");
  const double c = epsilon / 4.0;
  const InnerSpectrum sp = inner_spectrum(sigma1, sigma2);
  const Vector dvals = (sp.values.array() + c * c).sqrt().matrix();
  const Matrix d_eps = sp.vectors * dvals.asDiagonal() * sp.vectors.transpose();
  // sigma1 X_eps = S1^1/2 D_eps S1^-1/2 - (eps/4) I
  const Matrix root_inv = spd_inv_sqrt(sigma1).matrix();
  return sp.root1.matrix() * d_eps * root_inv -
         c * Matrix::Identity(sigma1.dim(), sigma1.dim());
}

GaussianCoupling optimal_coupling(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                                  double epsilon) {
  return GaussianCoupling{sigma1, sigma2, optimal_coupling_cross(sigma1, sigma2, epsilon)};
}

SpdMatrix gelbrich_gradient(const SpdMatrix& sigma1, const SpdMatrix& sigma2,
                            const SpdMatrix& reference, double epsilon) {
  check_epsilon(epsilon);
  require_same_dim(sigma1, sigma2, "gelbrich_gradient");
  require_pd(sigma1, "gelbrich_gradient(sigma1)");
  require_pd(sigma2, "gelbrich_gradient(sigma2)");
  const Index d = sigma1.dim();
  const double c = epsilon / 4.0;
  const InnerSpectrum sp = inner_spectrum(sigma1, sigma2);

  // D^-1 - c D^-1 (D + c)^-1 collapses to (D + c)^-1.
  const Vector shifted_inv = ((sp.values.array() + c * c).sqrt() + c).inverse().matrix();
  const Matrix middle = sp.vectors * shifted_inv.asDiagonal() * sp.vectors.transpose();
  Matrix grad = Matrix::Identity(d, d) - sp.root1.matrix() * middle * sp.root1.matrix();
  if (epsilon > 0.0) {
    require_same_dim(sigma1, reference, "gelbrich_gradient");
    require_pd(reference, "gelbrich_gradient(reference)");
    grad += 0.5 * epsilon * (spd_inv(reference).matrix() - spd_inv(sigma2).matrix());
  }
  return sym_project(grad);
}

void check_spec_well_formed(const AmbiguitySpec& spec) {
  check_epsilon(spec.epsilon);
  if (spec.epsilon > kMaxEpsilon) {
    throw Error(ErrorCode::kInvalidInput,
                "epsilon " + std::to_string(spec.epsilon) +
                    " exceeds 1e6; the ambiguity ball degenerates in this regime");
  }
  if (!(spec.radius >= 0.0) || !std::isfinite(spec.radius)) {
    throw Error(ErrorCode::kInvalidInput, "radius must be finite and >= 0");
  }
  require_same_dim(spec.center, spec.reference, "ambiguity spec");
  require_pd(spec.center, "ambiguity center");
  require_pd(spec.reference, "ambiguity reference");
}

double minimal_radius_closed_form(const AmbiguitySpec& spec) {
  check_spec_well_formed(spec);
  const double eps = spec.epsilon;
  if (eps == 0.0) return 0.0;
  const double d = static_cast<double>(spec.dim());
  const SpdMatrix shifted = spec.center + SpdMatrix::scaled_identity(spec.dim(), eps / 2.0);
  return 0.5 * eps *
         (trace_of_solve(spec.reference, shifted) - d + spd_logdet(spec.reference) -
          d * std::log(eps / 2.0));
}

GelbrichMinimum minimize_gelbrich(const SpdMatrix& center, const SpdMatrix& reference,
                                  double epsilon, int max_iters, double gradient_tol) {
  check_epsilon(epsilon);
  require_pd(center, "minimize_gelbrich(center)");
  if (epsilon == 0.0) {
    // Squared Gelbrich distance vanishes at the center.
    return GelbrichMinimum{center, 0.0, 0, 0.0};
  }
  require_pd(reference, "minimize_gelbrich(reference)");

  const auto value_at = [&](const SpdMatrix& x) {
    return gelbrich_entropic(center, x, reference, epsilon);
  };
  const auto is_chol_pd = [](const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    return llt.info() == Eigen::Success;
  };

  SpdMatrix x = center + SpdMatrix::scaled_identity(center.dim(), epsilon / 2.0);
  double f = value_at(x);
  SpdMatrix g = gelbrich_gradient(center, x, reference, epsilon);
  double step = 1.0;
  const double slack = 8.0 * std::numeric_limits<double>::epsilon();

  for (int it = 0; it < max_iters; ++it) {
    const double gnorm = g.frobenius_norm();
    if (gnorm <= gradient_tol) return GelbrichMinimum{x, f, it, gnorm};

    const double g2 = gnorm * gnorm;
    double t = step;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt, t *= 0.5) {
      const Matrix trial_m = x.matrix() - t * g.matrix();
      if (!is_chol_pd(trial_m)) continue;
      const SpdMatrix trial = sym_project(trial_m);
      const double f_trial = value_at(trial);
      if (f_trial <= f - 1e-4 * t * g2 + slack * std::max(1.0, std::abs(f))) {
        const SpdMatrix g_trial = gelbrich_gradient(center, trial, reference, epsilon);
        // Barzilai-Borwein trial step for the next iteration.
        const Matrix s = trial.matrix() - x.matrix();
        const Matrix y = g_trial.matrix() - g.matrix();
        const double sy = (s.array() * y.array()).sum();
        step = (sy > 0.0 && std::isfinite(sy)) ? s.squaredNorm() / sy : 2.0 * t;
        x = trial;
        f = f_trial;
        g = g_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::kNoConvergence,
                  "minimize_gelbrich: line search stalled at gradient norm " +
                      std::to_string(gnorm));
    }
  }
  const double gnorm = g.frobenius_norm();
  if (gnorm <= gradient_tol) return GelbrichMinimum{x, f, max_iters, gnorm};
  throw Error(ErrorCode::kNoConvergence,
              "minimize_gelbrich: " + std::to_string(max_iters) +
                  " iterations exhausted at gradient norm " + std::to_string(gnorm));
}

double minimal_radius_numeric(const AmbiguitySpec& spec) {
  check_spec_well_formed(spec);
  return minimize_gelbrich(spec.center, spec.reference, spec.epsilon).value;
}

FeasibilityReport validate(const AmbiguitySpec& spec) {
  FeasibilityReport report;
  report.radius = spec.radius;
  try {
    report.rho_min_numeric = minimal_radius_numeric(spec);
    report.rho_min_closed_form = minimal_radius_closed_form(spec);
    report.feasible = spec.radius >= report.rho_min_numeric - 1e-9;
  } catch (const Error& e) {
    report.feasible = false;
    report.rho_min_numeric = std::numeric_limits<double>::quiet_NaN();
    report.rho_min_closed_form = std::numeric_limits<double>::quiet_NaN();
    report.message = e.what();
  }
  return report;
}

}  // namespace sinkhorn_lqg
