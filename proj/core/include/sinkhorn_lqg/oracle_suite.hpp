#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "sinkhorn_lqg/oracles.hpp"

// Named cross-checks between the solver path and the oracles. Each check
// returns the worst metric seen and the tolerance it is held to.
namespace sinkhorn_lqg::oracles {

struct CheckResult {
  bool pass = false;
  double metric = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// -- random-matrix checks (d <= 3 unless noted) --

/// |coupling_descent value - G_eps| and ||K* - S1 X_eps||_F, eigenvalues in
/// [0.3, 3], eps cycling through {0.1, 1, 10}. Tolerance 1e-6 on both.
CheckResult check_coupling_tightness(std::mt19937_64& rng, int pairs);
/// |lhs - rhs| / max(1, |lhs|) <= 1e-8 and lhs >= G_eps - 1e-9 on random feasible K.
CheckResult check_decomposition(std::mt19937_64& rng, int couplings);
/// |G_{1e-6} - G_0| <= 1e-3, eigenvalues in [0.5, 2].
CheckResult check_gelbrich_limit(std::mt19937_64& rng, int pairs);
/// Central differences at step 1e-5 against gelbrich_gradient, d <= 4. Tolerance 1e-5.
CheckResult check_gradient(std::mt19937_64& rng, int triples);
/// Midpoint convexity of G_eps in its second argument, lambda in {1/4, 1/2, 3/4}.
CheckResult check_convexity(std::mt19937_64& rng, int trials);
/// Closed-form Lagrangian maximizer against gradient ascent. Tolerance 1e-6 relative.
CheckResult check_lagrangian(std::mt19937_64& rng, int trials);
/// Lifted rollout cost against the step-by-step recursion. Tolerance 1e-9 relative.
CheckResult check_recursion(std::mt19937_64& rng, int trials);
/// minimal_radius_numeric against rho_min_scalar on random scalar specs. Tolerance 1e-6.
CheckResult check_rho_min(std::mt19937_64& rng, int specs);

// -- scalar checks --

/// scalar_gelbrich against gelbrich_entropic on the (1, 1.5, 1, eps = 1) instance.
CheckResult check_scalar_gelbrich();
/// coupling_descent against gelbrich_entropic on the same instance.
CheckResult check_scalar_coupling();
/// Decomposition identity at K = 0 on the same instance.
CheckResult check_scalar_decomposition();
/// |solve_game value - brute_game value| <= 1e-2 on the given game.
CheckResult check_brute_game(const ScalarGame& game);

enum class SuiteKind { kDefault, kScalar, kRandom };

/// Throws kInvalidInput for anything but "default", "scalar", "random".
SuiteKind parse_suite_kind(const std::string& name);

/// {check_name: {"pass", "metric", "tolerance"}}. "default" runs both suites.
nlohmann::json run_oracle_suite(SuiteKind kind, std::uint64_t seed);

/// True iff every entry of a suite report passes.
bool suite_passed(const nlohmann::json& report);

}  // namespace sinkhorn_lqg::oracles
