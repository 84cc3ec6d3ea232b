#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sinkhorn_lqg/dr_solver.hpp"
#include "sinkhorn_lqg/lifted_system.hpp"
#include "sinkhorn_lqg/simulation.hpp"

namespace sinkhorn_lqg::cli {

/// Everything a run needs, with per-step quantities already expanded to
/// `horizon` entries.
///
/// JSON layout (see README for an example):
///   horizon
///   system     {A, B, C, Q, Q_terminal, R}       single matrix or per-step list
///   nominal    {X0, W, V}                        W, V single or per-step
///   reference  {X0, W, V}                        optional, identity by default
///   ambiguity  {epsilon, rho_x0, rho_w, rho_v}   rho_w, rho_v scalar or per-step
///   solver     SolverOptions fields               optional
///   simulation {samples, seed}                   optional
struct RunConfig {
  SystemSpec system;
  CovarianceBlocks nominal;
  CovarianceBlocks reference;
  double epsilon = 0.0;
  double rho_x0 = 0.0;
  std::vector<double> rho_w;
  std::vector<double> rho_v;
  SolverOptions solver;
  SimulationPlan simulation;

  int horizon() const { return system.horizon; }
  AmbiguityBlocks ambiguity() const;
  /// Scales every radius by `factor`.
  void scale_radii(double factor);
  /// Sets every radius to `rho`.
  void set_radii(double rho);
};

/// Throws Error(kInvalidInput) on schema violations and Error(kInfeasible)
/// when epsilon exceeds kMaxEpsilon.
RunConfig config_from_json(const nlohmann::json& j);
/// Canonical form: a per-step list collapses to one matrix when all steps agree.
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& c);

struct Overrides {
  std::optional<double> epsilon;
  std::optional<double> rho;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol_gap;
};

/// Validates the overridden values the same way the loader does.
void apply_overrides(RunConfig& c, const Overrides& o);

}  // namespace sinkhorn_lqg::cli
