#include "sinkhorn_lqg/oracle_suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace sinkhorn_lqg::oracles {

namespace {

template <typename... Args>
std::string printf_string(const char* fmt, Args... args) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

constexpr std::array<double, 3> kEpsilons{0.1, 1.0, 10.0};

Index random_dim(std::mt19937_64& rng, Index max_dim) {
  return std::uniform_int_distribution<Index>(1, max_dim)(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix gaussian_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

CheckResult finish(double metric, double tolerance, std::string detail = {}) {
  return CheckResult{metric <= tolerance, metric, tolerance, std::move(detail)};
}

CheckResult failed(double tolerance, const std::exception& e) {
  return CheckResult{false, std::numeric_limits<double>::infinity(), tolerance, e.what()};
}

// K = S1^1/2 Z S2^1/2 with ||Z||_2 < 1 keeps the joint covariance PD.
Matrix random_feasible_cross(std::mt19937_64& rng, const SpdMatrix& s1, const SpdMatrix& s2) {
  const Index d = s1.dim();
  Matrix z = gaussian_matrix(rng, d, d);
  const double norm = Eigen::JacobiSVD<Matrix>(z).singularValues()(0);
  z *= uniform(rng, 0.0, 0.95) / std::max(norm, 1e-12);
  return spd_sqrt(s1).matrix() * z * spd_sqrt(s2).matrix();
}

const SpdMatrix kOne = SpdMatrix::diagonal({1.0});
const SpdMatrix kOneHalf = SpdMatrix::diagonal({1.5});

}  // namespace

CheckResult check_coupling_tightness(std::mt19937_64& rng, int pairs) {
  constexpr double tol = 1e-6;
  double worst = 0.0;
  try {
    for (int i = 0; i < pairs; ++i) {
      const Index d = random_dim(rng, 3);
      const double eps = kEpsilons[static_cast<std::size_t>(i) % kEpsilons.size()];
      const SpdMatrix s1 = random_spd(rng, d, 0.3, 3.0);
      const SpdMatrix s2 = random_spd(rng, d, 0.3, 3.0);
      const SpdMatrix ref = random_spd(rng, d, 0.3, 3.0);
      const CouplingOptimum opt = coupling_descent(s1, s2, ref, eps);
      const double gap = std::abs(opt.value - gelbrich_entropic(s1, s2, ref, eps));
      const double cross = (opt.cross - optimal_coupling_cross(s1, s2, eps)).norm();
      worst = std::max({worst, gap, cross});
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_decomposition(std::mt19937_64& rng, int couplings) {
  constexpr double tol = 1e-8;
  double worst = 0.0;
  double worst_bound = 0.0;
  try {
    for (int i = 0; i < couplings; ++i) {
      const Index d = random_dim(rng, 3);
      const double eps = kEpsilons[static_cast<std::size_t>(i) % kEpsilons.size()];
      const SpdMatrix s1 = random_spd(rng, d, 0.3, 3.0);
      const SpdMatrix s2 = random_spd(rng, d, 0.3, 3.0);
      const SpdMatrix ref = random_spd(rng, d, 0.3, 3.0);
      const Matrix k = random_feasible_cross(rng, s1, s2);
      const Decomposition dec = decomposition_identity(s1, s2, ref, eps, k);
      worst = std::max(worst, std::abs(dec.lhs - dec.rhs) / std::max(1.0, std::abs(dec.lhs)));
      const double g = gelbrich_entropic(s1, s2, ref, eps);
      worst_bound = std::max(worst_bound, g - dec.lhs);
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  CheckResult out = finish(worst, tol);
  out.pass = out.pass && worst_bound <= 1e-9;
  out.detail = printf_string("max(G - lhs) = %.3e", worst_bound);
  return out;
}

CheckResult check_gelbrich_limit(std::mt19937_64& rng, int pairs) {
  constexpr double tol = 1e-3;
  double worst = 0.0;
  try {
    for (int i = 0; i < pairs; ++i) {
      const Index d = random_dim(rng, 3);
      const SpdMatrix s1 = random_spd(rng, d, 0.5, 2.0);
      const SpdMatrix s2 = random_spd(rng, d, 0.5, 2.0);
      const SpdMatrix ref = SpdMatrix::identity(d);
      worst = std::max(worst, std::abs(gelbrich_entropic(s1, s2, ref, 1e-6) -
                                       gelbrich_entropic(s1, s2, ref, 0.0)));
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_gradient(std::mt19937_64& rng, int triples) {
  constexpr double tol = 1e-5;
  double worst = 0.0;
  try {
    for (int i = 0; i < triples; ++i) {
      const Index d = random_dim(rng, 4);
      const double eps = kEpsilons[static_cast<std::size_t>(i) % kEpsilons.size()];
      const SpdMatrix s1 = random_spd(rng, d, 0.3, 3.0);
      const SpdMatrix s2 = random_spd(rng, d, 0.3, 3.0);
      const SpdMatrix ref = random_spd(rng, d, 0.3, 3.0);
      const MatrixFunction fn = [&](const SpdMatrix& m) {
        return gelbrich_entropic(s1, m, ref, eps);
      };
      const MatrixGradient grad = [&](const SpdMatrix& m) {
        return gelbrich_gradient(s1, m, ref, eps);
      };
      worst = std::max(worst, fd_gradient_check(fn, grad, s2, 1e-5));
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_convexity(std::mt19937_64& rng, int trials) {
  constexpr double tol = 1e-9;
  constexpr std::array<double, 3> weights{0.25, 0.5, 0.75};
  double worst = 0.0;
  try {
    for (int i = 0; i < trials; ++i) {
      const Index d = random_dim(rng, 3);
      const double eps = kEpsilons[static_cast<std::size_t>(i) % kEpsilons.size()];
      const SpdMatrix a = random_spd(rng, d, 0.1, 5.0);
      const SpdMatrix b = random_spd(rng, d, 0.1, 5.0);
      const SpdMatrix center = random_spd(rng, d, 0.1, 5.0);
      const SpdMatrix ref = random_spd(rng, d, 0.3, 3.0);
      const double ga = gelbrich_entropic(center, a, ref, eps);
      const double gb = gelbrich_entropic(center, b, ref, eps);
      for (double w : weights) {
        const double mid = gelbrich_entropic(center, w * a + (1.0 - w) * b, ref, eps);
        worst = std::max(worst, mid - (w * ga + (1.0 - w) * gb));
      }
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_lagrangian(std::mt19937_64& rng, int trials) {
  constexpr double tol = 1e-6;
  double worst = 0.0;
  try {
    for (int i = 0; i < trials; ++i) {
      const Index d = random_dim(rng, 3);
      const double eps = kEpsilons[static_cast<std::size_t>(i) % kEpsilons.size()];
      const AmbiguitySpec spec{random_spd(rng, d, 0.3, 3.0), random_spd(rng, d, 0.3, 3.0), 1.0,
                               eps};
      const SpdMatrix cost = random_spd(rng, d, 0.1, 2.0);
      // Above lambda_max(P^-1/2 C P^-1/2), P = I + (eps/2) Sigma^-1, the
      // Lagrangian is strictly concave with a PD maximizer.
      const SpdMatrix p = SpdMatrix::identity(d) + (0.5 * eps) * spd_inv(spec.reference);
      const double crit = eigenvalues(congruence(spd_inv_sqrt(p).matrix(), cost)).maxCoeff();
      const double lambda = crit * uniform(rng, 1.2, 3.0);
      const SpdMatrix closed = lagrangian_maximizer(cost, spec, lambda);
      const SpdMatrix ascent = lagrangian_ascent(cost, spec, lambda);
      worst = std::max(worst, (closed - ascent).frobenius_norm() /
                                  std::max(1.0, closed.frobenius_norm()));
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_recursion(std::mt19937_64& rng, int trials) {
  constexpr double tol = 1e-9;
  double worst = 0.0;
  try {
    for (int i = 0; i < trials; ++i) {
      const int horizon = std::uniform_int_distribution<int>(1, 4)(rng);
      const Index d = random_dim(rng, 3);
      const Index m = random_dim(rng, 2);
      const Index p = random_dim(rng, 3);
      SystemSpec spec;
      spec.horizon = horizon;
      for (int t = 0; t < horizon; ++t) {
        spec.A.push_back(0.6 * gaussian_matrix(rng, d, d));
        spec.B.push_back(gaussian_matrix(rng, d, m));
        spec.C.push_back(gaussian_matrix(rng, p, d));
        spec.Q.push_back(random_spd(rng, d, 0.0, 2.0).matrix());
        spec.R.push_back(random_spd(rng, m, 0.1, 2.0).matrix());
      }
      spec.Q.push_back(random_spd(rng, d, 0.0, 2.0).matrix());
      const LiftedSystem sys = build_lifted(spec);
      Policy policy = zero_policy(sys);
      const Matrix u = gaussian_matrix(rng, sys.u_dim(), sys.v_dim());
      policy.U = sys.causal_mask.select(u, Matrix::Zero(u.rows(), u.cols()));
      policy.q = gaussian_matrix(rng, sys.u_dim(), 1);
      const NoiseRealization noise{gaussian_matrix(rng, sys.w_dim(), 1),
                                   gaussian_matrix(rng, sys.v_dim(), 1)};
      const double lifted = rollout_cost(sys, policy, noise);
      const double direct = recursive_cost(spec, policy, noise);
      worst = std::max(worst, std::abs(lifted - direct) / std::max(1.0, std::abs(direct)));
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_rho_min(std::mt19937_64& rng, int specs) {
  constexpr double tol = 1e-6;
  double worst = 0.0;
  try {
    for (int i = 0; i < specs; ++i) {
      const double center = uniform(rng, 0.3, 3.0);
      const double ref = uniform(rng, 0.3, 3.0);
      const double eps = uniform(rng, 0.1, 3.0);
      const AmbiguitySpec spec{SpdMatrix::diagonal({center}), SpdMatrix::diagonal({ref}), 0.0,
                               eps};
      worst = std::max(worst, std::abs(minimal_radius_numeric(spec) -
                                       rho_min_scalar(center, ref, eps).value));
    }
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
  return finish(worst, tol);
}

CheckResult check_scalar_gelbrich() {
  constexpr double tol = 1e-12;
  try {
    return finish(std::abs(scalar_gelbrich(1.0, 1.5, 1.0, 1.0) -
                           gelbrich_entropic(kOne, kOneHalf, kOne, 1.0)),
                  tol);
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
}

CheckResult check_scalar_coupling() {
  constexpr double tol = 1e-6;
  try {
    const CouplingOptimum opt = coupling_descent(kOne, kOneHalf, kOne, 1.0);
    return finish(std::abs(opt.value - gelbrich_entropic(kOne, kOneHalf, kOne, 1.0)), tol);
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
}

CheckResult check_scalar_decomposition() {
  constexpr double tol = 1e-8;
  try {
    const Decomposition dec = decomposition_identity(kOne, kOneHalf, kOne, 1.0, Matrix::Zero(1, 1));
    CheckResult out = finish(std::abs(dec.lhs - dec.rhs) / std::max(1.0, std::abs(dec.lhs)), tol);
    out.pass = out.pass && dec.lhs > gelbrich_entropic(kOne, kOneHalf, kOne, 1.0);
    return out;
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
}

CheckResult check_brute_game(const ScalarGame& game) {
  constexpr double tol = 1e-2;
  try {
    const BruteGameResult brute = brute_game(game);
    SolverOptions opts;
    opts.tol_gap = 1e-6;
    opts.max_iters = 5000;
    const GameSolution sol = solve_game(build_lifted(game.system()), game.ambiguity(), opts);
    return finish(std::abs(sol.value - brute.value), tol,
                  printf_string("solver %.6f, grid %.6f", sol.value, brute.value));
  } catch (const std::exception& e) {
    return failed(tol, e);
  }
}

SuiteKind parse_suite_kind(const std::string& name) {
  if (name == "default") return SuiteKind::kDefault;
  if (name == "scalar") return SuiteKind::kScalar;
  if (name == "random") return SuiteKind::kRandom;
  throw Error(ErrorCode::kInvalidInput, "unknown oracle suite '" + name + "'");
}

nlohmann::json run_oracle_suite(SuiteKind kind, std::uint64_t seed) {
  nlohmann::json report = nlohmann::json::object();
  const auto record = [&](const std::string& name, const CheckResult& r) {
    nlohmann::json entry = {{"pass", r.pass}, {"tolerance", r.tolerance}};
    entry["metric"] = std::isfinite(r.metric) ? nlohmann::json(r.metric) : nlohmann::json();
    if (!r.detail.empty()) entry["detail"] = r.detail;
    report[name] = std::move(entry);
  };
  if (kind != SuiteKind::kRandom) {
    record("scalar_gelbrich", check_scalar_gelbrich());
    record("scalar_coupling", check_scalar_coupling());
    record("scalar_decomposition", check_scalar_decomposition());
    std::mt19937_64 rng(seed);
    record("scalar_rho_min", check_rho_min(rng, 10));
    record("scalar_brute_game", check_brute_game(ScalarGame{}));
  }
  if (kind != SuiteKind::kScalar) {
    // One generator per check so adding a check never perturbs the others.
    const auto rng_for = [seed](std::uint64_t salt) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(salt)};
      return std::mt19937_64(seq);
    };
    auto r1 = rng_for(1);
    record("coupling_tightness", check_coupling_tightness(r1, 20));
    auto r2 = rng_for(2);
    record("decomposition_identity", check_decomposition(r2, 100));
    auto r3 = rng_for(3);
    record("gelbrich_limit", check_gelbrich_limit(r3, 50));
    auto r4 = rng_for(4);
    record("gradient_fd", check_gradient(r4, 20));
    auto r5 = rng_for(5);
    record("convexity", check_convexity(r5, 100));
    auto r6 = rng_for(6);
    record("lagrangian_closed_form", check_lagrangian(r6, 10));
    auto r7 = rng_for(7);
    record("lifted_vs_recursion", check_recursion(r7, 20));
  }
  return report;
}

bool suite_passed(const nlohmann::json& report) {
  return std::all_of(report.begin(), report.end(),
                     [](const nlohmann::json& e) { return e.value("pass", false); });
}

}  // namespace sinkhorn_lqg::oracles
