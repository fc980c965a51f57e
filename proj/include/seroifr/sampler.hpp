#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace seroifr {

/// Differentiable log-density target: value_grad fills grad (resized by the
/// caller to dim) and returns the log density. Must be reentrant; chains may
/// evaluate it concurrently.
struct LogDensityFn {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd& grad)> value_grad;
};

struct SamplerConfig {
  int chains = 3;
  int warmup = 2500;
  int samples = 3000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;
  double init_jitter = 2.0;  // uniform(-jitter, jitter) init on the unconstrained scale
  int threads = 0;           // 0 = one thread per chain up to hardware concurrency

  // warmup schedule: step-size-only buffers around expanding metric windows
  int init_buffer = 75;
  int term_buffer = 50;
  int base_window = 25;
  double max_energy_error = 1000.0;  // divergence threshold

  void validate() const;
};

struct ChainStats {
  std::vector<double> accept_stat;  // averaged Metropolis probability per iteration
  std::vector<int> tree_depth;
  std::vector<int> n_leapfrog;
  std::vector<std::uint8_t> divergent;
  std::vector<double> energy;  // Hamiltonian of the selected draw
  double step_size = 0.0;
  Eigen::VectorXd inv_metric;
};

/// Post-warmup draws (unconstrained scale), one matrix per chain
/// (samples x dim), plus per-iteration sampler statistics.
struct RawDraws {
  int dim = 0;
  int max_tree_depth = 0;
  std::vector<Eigen::MatrixXd> chains;
  std::vector<ChainStats> stats;

  int n_chains() const { return static_cast<int>(chains.size()); }
  int n_samples() const { return chains.empty() ? 0 : static_cast<int>(chains.front().rows()); }
};

/// Multinomial no-U-turn sampler with dual-averaging step size adaptation and
/// a diagonal metric estimated over expanding warmup windows. Deterministic
/// given the seed: each chain derives its own generator from the master seed,
/// so results do not depend on execution order or thread count.
RawDraws nuts_sample(const LogDensityFn& target, const SamplerConfig& config);

struct RunDiagnosis {
  std::vector<int> divergences_per_chain;
  std::vector<int> max_depth_hits_per_chain;
  std::vector<double> ebfmi_per_chain;
  int total_divergences = 0;
  int total_max_depth_hits = 0;
  bool energy_flag = false;  // any chain with E-BFMI < 0.2
};

RunDiagnosis diagnose_run(const RawDraws& draws);

}  // namespace seroifr
