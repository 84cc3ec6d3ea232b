#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sinkhorn_lqg/dr_solver.hpp"
#include "sinkhorn_lqg/lifted_system.hpp"

namespace sinkhorn_lqg {

struct SimulationPlan {
  std::size_t samples = 5000;
  std::uint64_t seed = 0;
};

struct Histogram {
  std::vector<double> edges;  // left edge of each bin
  std::vector<std::size_t> counts;
  double bin_width = 0.0;
  std::string rule = "freedman-diaconis";
};

struct CostSummary {
  double empirical_mean = 0.0;
  double empirical_std = 0.0;
  double theoretical_mean = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// |empirical_mean - theoretical_mean| <= 4 * empirical_std / sqrt(n)
  bool within_band = false;
  std::vector<double> per_sample_costs;
  Histogram histogram;

  double standard_error() const;
};

/// Draws exogenous noise block by block from zero-mean Gaussians. Each block
/// of each sample has its own generator keyed by (seed, index, block), so a
/// realization depends only on those three numbers and never on scheduling.
class NoiseSampler {
 public:
  /// Throws kNotPd if any block covariance is singular.
  explicit NoiseSampler(const CovarianceBlocks& blocks);

  NoiseRealization sample(std::uint64_t seed, std::uint64_t index) const;

 private:
  std::vector<Matrix> x_factors_;  // lower Cholesky factors, x0 then w_t
  std::vector<Matrix> v_factors_;
  Index w_dim_ = 0;
  Index v_dim_ = 0;
};

NoiseRealization sample_noise(const CovarianceBlocks& blocks, std::uint64_t seed,
                              std::uint64_t index);

/// Simulates plan.samples closed-loop rollouts of `policy` under noise drawn
/// from `blocks`. `threads` == 0 reads SINKHORN_LQG_THREADS (0/unset = auto).
CostSummary run_plan(const LiftedSystem& sys, const Policy& policy,
                     const CovarianceBlocks& blocks, const SimulationPlan& plan,
                     unsigned threads = 0);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

Histogram freedman_diaconis(std::span<const double> values);

/// Worker count from SINKHORN_LQG_THREADS, falling back to the hardware.
unsigned simulation_threads();

}  // namespace sinkhorn_lqg
