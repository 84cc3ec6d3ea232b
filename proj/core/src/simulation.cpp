#include "sinkhorn_lqg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

namespace sinkhorn_lqg {

namespace {

Matrix cholesky_factor(const SpdMatrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov.matrix());
  if (cov.dim() == 0 || llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPd, std::string(what) + " covariance is not positive definite");
  }
  return llt.matrixL();
}

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(block)};
  return std::mt19937_64(seq);
}

void fill_block(Eigen::Ref<Vector> out, const Matrix& factor, std::uint64_t seed,
                std::uint64_t index, std::uint64_t block) {
  auto engine = block_engine(seed, index, block);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(factor.rows());
  for (Index i = 0; i < z.size(); ++i) z(i) = normal(engine);
  out = factor.triangularView<Eigen::Lower>() * z;
}

double pairwise_sum_impl(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double CostSummary::standard_error() const {
  return n > 0 ? empirical_std / std::sqrt(static_cast<double>(n)) : 0.0;
}

NoiseSampler::NoiseSampler(const CovarianceBlocks& blocks) {
  x_factors_.push_back(cholesky_factor(blocks.X0, "x0"));
  w_dim_ = blocks.X0.dim();
  for (std::size_t t = 0; t < blocks.W.size(); ++t) {
    x_factors_.push_back(cholesky_factor(blocks.W[t], "w_t"));
    w_dim_ += blocks.W[t].dim();
  }
  for (std::size_t t = 0; t < blocks.V.size(); ++t) {
    v_factors_.push_back(cholesky_factor(blocks.V[t], "v_t"));
    v_dim_ += blocks.V[t].dim();
  }
}

NoiseRealization NoiseSampler::sample(std::uint64_t seed, std::uint64_t index) const {
  NoiseRealization out{Vector(w_dim_), Vector(v_dim_)};
  std::uint64_t block = 0;
  Index offset = 0;
  for (const auto& f : x_factors_) {
    fill_block(out.w_stack.segment(offset, f.rows()), f, seed, index, block++);
    offset += f.rows();
  }
  offset = 0;
  for (const auto& f : v_factors_) {
    fill_block(out.v_stack.segment(offset, f.rows()), f, seed, index, block++);
    offset += f.rows();
  }
  return out;
}

NoiseRealization sample_noise(const CovarianceBlocks& blocks, std::uint64_t seed,
                              std::uint64_t index) {
  return NoiseSampler(blocks).sample(seed, index);
}

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

Histogram freedman_diaconis(std::span<const double> values) {
  Histogram h;
  if (values.empty()) return h;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double n = static_cast<double>(sorted.size());
  double width = 2.0 * iqr / std::cbrt(n);
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) {
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::clamp<std::size_t>(bins, 1, 10000);
    width = (hi - lo) / static_cast<double>(bins);
  } else {
    width = std::max(hi - lo, 1.0);
  }
  h.bin_width = width;
  h.counts.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  for (double v : sorted) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

unsigned simulation_threads() {
  if (const char* env = std::getenv("SINKHORN_LQG_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

CostSummary run_plan(const LiftedSystem& sys, const Policy& policy,
                     const CovarianceBlocks& blocks, const SimulationPlan& plan,
                     unsigned threads) {
  if (plan.samples == 0) throw Error(ErrorCode::kInvalidInput, "samples must be >= 1");
  require_causal(sys, policy);
  const NoiseSampler sampler(blocks);

  CostSummary out;
  out.n = plan.samples;
  out.seed = plan.seed;
  out.per_sample_costs.assign(plan.samples, 0.0);

  const auto cost_of = [&](std::size_t i) {
    return rollout_cost(sys, policy, sampler.sample(plan.seed, i));
  };

  const unsigned workers =
      std::min<std::size_t>(threads == 0 ? simulation_threads() : threads, plan.samples);
  if (workers <= 1) {
    for (std::size_t i = 0; i < plan.samples; ++i) out.per_sample_costs[i] = cost_of(i);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (plan.samples + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(plan.samples, begin + chunk);
      pool.emplace_back([&, begin, end] {
        for (std::size_t i = begin; i < end; ++i) out.per_sample_costs[i] = cost_of(i);
      });
    }
  }

  const std::span<const double> costs(out.per_sample_costs);
  const double n = static_cast<double>(plan.samples);
  out.empirical_mean = pairwise_sum(costs) / n;
  std::vector<double> sq(plan.samples);
  for (std::size_t i = 0; i < plan.samples; ++i) {
    const double dev = out.per_sample_costs[i] - out.empirical_mean;
    sq[i] = dev * dev;
  }
  out.empirical_std = plan.samples > 1 ? std::sqrt(pairwise_sum(sq) / (n - 1.0)) : 0.0;
  out.theoretical_mean = expected_cost(sys, policy, blocks.assemble_w(), blocks.assemble_v());
  out.within_band = std::abs(out.empirical_mean - out.theoretical_mean) <=
                    4.0 * out.standard_error() + 1e-12 * std::abs(out.theoretical_mean);
  out.histogram = freedman_diaconis(costs);
  return out;
}

}  // namespace sinkhorn_lqg
