#include "seroifr/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "seroifr/common.hpp"
#include "seroifr/rng.hpp"

namespace seroifr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct Phase {
  Eigen::VectorXd q, p, grad;
  double logp = 0.0;
};

struct Welford {
  long n = 0;
  Eigen::VectorXd mean, m2;
  void reset(int dim) {
    n = 0;
    mean = Eigen::VectorXd::Zero(dim);
    m2 = Eigen::VectorXd::Zero(dim);
  }
  void add(const Eigen::VectorXd& x) {
    ++n;
    Eigen::VectorXd d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d.cwiseProduct(x - mean);
  }
  Eigen::VectorXd variance() const { return m2 / std::max<double>(1.0, static_cast<double>(n - 1)); }
};

struct DualAveraging {
  double delta = 0.8;
  double mu = 0.0, log_eps = 0.0, log_eps_bar = 0.0, h_bar = 0.0;
  double m = 1.0;
  void restart(double eps0) {
    mu = std::log(10.0 * eps0);
    log_eps = std::log(eps0);
    log_eps_bar = 0.0;
    h_bar = 0.0;
    m = 1.0;
  }
  void update(double accept) {
    double frac = 1.0 / (m + 10.0);
    h_bar = (1.0 - frac) * h_bar + frac * (delta - accept);
    log_eps = mu - std::sqrt(m) / 0.05 * h_bar;
    double w = std::pow(m, -0.75);
    log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
    m += 1.0;
  }
};

class NutsChain {
 public:
  NutsChain(const LogDensityFn& target, const SamplerConfig& cfg, std::uint64_t seed)
      : target_(target), cfg_(cfg), rng_(seed), inv_metric_(Eigen::VectorXd::Ones(target.dim)) {}

  void run(Eigen::MatrixXd& out_draws, ChainStats& out_stats) {
    const int dim = target_.dim;
    Phase z;
    z.q.resize(dim);
    z.grad.resize(dim);
    initialize(z);

    dual_.delta = cfg_.target_accept;
    step_size_ = find_reasonable_step_size(z);
    dual_.restart(step_size_);

    int init_buffer = 0;
    auto window_ends = metric_windows(init_buffer);
    Welford acc;
    acc.reset(dim);
    std::size_t next_window = 0;

    for (int it = 0; it < cfg_.warmup; ++it) {
      IterStats st = transition(z);
      dual_.update(st.accept_stat);
      step_size_ = std::exp(dual_.log_eps);
      if (it >= init_buffer && next_window < window_ends.size()) acc.add(z.q);
      if (next_window < window_ends.size() && it + 1 == window_ends[next_window]) {
        Eigen::VectorXd var = acc.variance();
        double n = static_cast<double>(acc.n);
        inv_metric_ = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
        acc.reset(dim);
        ++next_window;
        step_size_ = find_reasonable_step_size(z);
        dual_.restart(step_size_);
      }
    }
    step_size_ = std::exp(dual_.log_eps_bar);

    out_draws.resize(cfg_.samples, dim);
    out_stats.accept_stat.reserve(cfg_.samples);
    for (int it = 0; it < cfg_.samples; ++it) {
      IterStats st = transition(z);
      out_draws.row(it) = z.q.transpose();
      out_stats.accept_stat.push_back(st.accept_stat);
      out_stats.tree_depth.push_back(st.depth);
      out_stats.n_leapfrog.push_back(st.n_leapfrog);
      out_stats.divergent.push_back(st.divergent ? 1 : 0);
      out_stats.energy.push_back(st.energy);
    }
    out_stats.step_size = step_size_;
    out_stats.inv_metric = inv_metric_;
  }

 private:
  struct IterStats {
    double accept_stat = 0.0;
    int depth = 0;
    int n_leapfrog = 0;
    bool divergent = false;
    double energy = 0.0;
  };

  void eval(Phase& z) {
    z.logp = target_.value_grad(z.q, z.grad);
    if (!std::isfinite(z.logp) || !z.grad.allFinite()) {
      z.logp = -kInf;
      z.grad.setZero();
    }
  }

  void initialize(Phase& z) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (int i = 0; i < target_.dim; ++i) z.q[i] = rng_.uniform(-cfg_.init_jitter, cfg_.init_jitter);
      eval(z);
      if (std::isfinite(z.logp)) return;
    }
    fail(Errc::initialization_failure,
         "no finite log density found in 100 jittered initializations");
  }

  double hamiltonian(const Phase& z) const {
    if (!std::isfinite(z.logp)) return kInf;
    return -z.logp + 0.5 * z.p.dot(inv_metric_.cwiseProduct(z.p));
  }

  void sample_momentum(Phase& z) {
    z.p.resize(target_.dim);
    for (int i = 0; i < target_.dim; ++i) z.p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
  }

  void leapfrog(Phase& z, double eps) {
    z.p += 0.5 * eps * z.grad;
    z.q += eps * inv_metric_.cwiseProduct(z.p);
    eval(z);
    z.p += 0.5 * eps * z.grad;
  }

  double find_reasonable_step_size(const Phase& origin) {
    double eps = step_size_ > 0 ? step_size_ : 1.0;
    Phase z = origin;
    sample_momentum(z);
    Phase start = z;
    double h0 = hamiltonian(z);
    leapfrog(z, eps);
    double dh = h0 - hamiltonian(z);
    if (!std::isfinite(dh)) dh = -kInf;
    double direction = dh > std::log(0.8) ? 1.0 : -1.0;
    for (int i = 0; i < 100; ++i) {
      z = start;
      leapfrog(z, eps);
      dh = h0 - hamiltonian(z);
      if (!std::isfinite(dh)) dh = -kInf;
      if (direction > 0 && !(dh > std::log(0.8))) break;
      if (direction < 0 && !(dh < std::log(0.8))) break;
      eps = direction > 0 ? 2.0 * eps : 0.5 * eps;
      if (eps > 1e7 || eps < 1e-16)
        fail(Errc::initialization_failure, "step size search diverged; target geometry looks degenerate");
    }
    return eps;
  }

  bool criterion(const Eigen::VectorXd& ps_a, const Eigen::VectorXd& ps_b,
                 const Eigen::VectorXd& rho) const {
    return ps_a.dot(rho) > 0 && ps_b.dot(rho) > 0;
  }

  // Builds a subtree of 2^depth leapfrog steps extending z in the given
  // direction. Returns false when the subtree diverges or makes a U-turn.
  bool build_tree(int depth, Phase& z, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
                  Eigen::VectorXd& p_end, Eigen::VectorXd& ps_beg, Eigen::VectorXd& ps_end,
                  Phase& z_propose, double h0, double sign, double& log_sum_weight,
                  double& sum_metro_prob, int& n_leapfrog, bool& divergent) {
    if (depth == 0) {
      leapfrog(z, sign * step_size_);
      ++n_leapfrog;
      double h = hamiltonian(z);
      if (!std::isfinite(h)) h = kInf;
      if (h - h0 > cfg_.max_energy_error) {
        divergent = true;
        return false;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += std::min(1.0, std::exp(h0 - h));
      z_propose = z;
      rho += z.p;
      p_beg = z.p;
      p_end = z.p;
      ps_beg = inv_metric_.cwiseProduct(z.p);
      ps_end = ps_beg;
      return true;
    }

    double lsw_init = -kInf, lsw_final = -kInf;
    Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(target_.dim);
    Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(target_.dim);
    Eigen::VectorXd p_init_beg, p_init_end, ps_init_beg, ps_init_end;
    Eigen::VectorXd p_final_beg, p_final_end, ps_final_beg, ps_final_end;

    if (!build_tree(depth - 1, z, rho_init, p_init_beg, p_init_end, ps_init_beg, ps_init_end, z_propose,
                    h0, sign, lsw_init, sum_metro_prob, n_leapfrog, divergent))
      return false;
    Phase z_propose_final;
    if (!build_tree(depth - 1, z, rho_final, p_final_beg, p_final_end, ps_final_beg, ps_final_end,
                    z_propose_final, h0, sign, lsw_final, sum_metro_prob, n_leapfrog, divergent))
      return false;

    // multinomial sampling between the two halves
    double lsw_subtree = log_sum_exp(lsw_init, lsw_final);
    if (rng_.uniform01() < std::exp(lsw_final - lsw_subtree)) z_propose = z_propose_final;
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);

    Eigen::VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    p_beg = p_init_beg;
    ps_beg = ps_init_beg;
    p_end = p_final_end;
    ps_end = ps_final_end;

    // U-turn checks across the merged subtree and between the halves
    bool ok = criterion(ps_init_beg, ps_final_end, rho_subtree);
    ok = ok && criterion(ps_init_beg, ps_final_beg, rho_init + p_final_beg);
    ok = ok && criterion(ps_init_end, ps_final_end, rho_final + p_init_end);
    return ok;
  }

  IterStats transition(Phase& z) {
    IterStats st;
    sample_momentum(z);
    double h0 = hamiltonian(z);

    Phase z_plus = z, z_minus = z, z_sample = z, z_propose = z;
    Eigen::VectorXd p_sharp_plus = inv_metric_.cwiseProduct(z.p);
    Eigen::VectorXd p_sharp_minus = p_sharp_plus;
    Eigen::VectorXd rho = z.p;
    double log_sum_weight = 0.0;
    double sum_metro_prob = 0.0;
    bool divergent = false;

    while (st.depth < cfg_.max_tree_depth) {
      double lsw_subtree = -kInf;
      Eigen::VectorXd rho_subtree = Eigen::VectorXd::Zero(target_.dim);
      Eigen::VectorXd p_beg, p_end, ps_beg, ps_end;
      bool fwd = rng_.uniform01() < 0.5;
      bool valid;
      if (fwd)
        valid = build_tree(st.depth, z_plus, rho_subtree, p_beg, p_end, ps_beg, ps_end, z_propose, h0,
                           1.0, lsw_subtree, sum_metro_prob, st.n_leapfrog, divergent);
      else
        valid = build_tree(st.depth, z_minus, rho_subtree, p_beg, p_end, ps_beg, ps_end, z_propose, h0,
                           -1.0, lsw_subtree, sum_metro_prob, st.n_leapfrog, divergent);
      if (!valid) break;
      ++st.depth;

      // biased progressive sampling toward the fresh subtree
      if (lsw_subtree > log_sum_weight || rng_.uniform01() < std::exp(lsw_subtree - log_sum_weight))
        z_sample = z_propose;
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);

      rho += rho_subtree;
      if (fwd)
        p_sharp_plus = ps_end;
      else
        p_sharp_minus = ps_end;
      if (!criterion(p_sharp_minus, p_sharp_plus, rho)) break;
    }

    st.divergent = divergent;
    st.accept_stat = st.n_leapfrog > 0 ? sum_metro_prob / static_cast<double>(st.n_leapfrog) : 0.0;
    z = z_sample;
    st.energy = hamiltonian(z);
    return st;
  }

  std::vector<int> metric_windows(int& init_out) const {
    int warmup = cfg_.warmup, init = cfg_.init_buffer, term = cfg_.term_buffer, base = cfg_.base_window;
    if (init + term + base > warmup) {
      init = static_cast<int>(0.15 * warmup);
      term = static_cast<int>(0.10 * warmup);
      base = warmup - init - term;
    }
    init_out = init;
    std::vector<int> ends;
    int start = init, size = base;
    while (start < warmup - term) {
      int end = start + size;
      // absorb the remainder if the next doubled window would not fit
      if (end + 2 * size > warmup - term) end = warmup - term;
      ends.push_back(end);
      start = end;
      size *= 2;
    }
    return ends;
  }

  const LogDensityFn& target_;
  const SamplerConfig& cfg_;
  Rng rng_;
  Eigen::VectorXd inv_metric_;
  double step_size_ = 0.0;
  DualAveraging dual_;
};

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1) fail(Errc::bad_config, "chains must be >= 1");
  if (warmup < 100) fail(Errc::bad_config, "warmup must be >= 100");
  if (samples < 1) fail(Errc::bad_config, "samples must be >= 1");
  if (!(target_accept > 0 && target_accept < 1)) fail(Errc::bad_config, "target_accept must be in (0,1)");
  if (max_tree_depth < 1 || max_tree_depth > 20) fail(Errc::bad_config, "max_tree_depth must be in [1,20]");
}

RawDraws nuts_sample(const LogDensityFn& target, const SamplerConfig& config) {
  config.validate();
  if (target.dim < 1 || !target.value_grad) fail(Errc::bad_config, "target density is empty");

  RawDraws out;
  out.dim = target.dim;
  out.chains.resize(config.chains);
  out.stats.resize(config.chains);

  std::vector<std::exception_ptr> errors(config.chains);
  auto run_chain = [&](int k) {
    try {
      NutsChain chain(target, config, Rng::derive(config.seed, static_cast<std::uint64_t>(k)));
      chain.run(out.chains[k], out.stats[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  int pool = config.threads > 0 ? config.threads : static_cast<int>(std::min<unsigned>(hw, config.chains));
  if (pool <= 1) {
    for (int k = 0; k < config.chains; ++k) run_chain(k);
  } else {
    for (int base = 0; base < config.chains; base += pool) {
      std::vector<std::thread> workers;
      for (int k = base; k < std::min(config.chains, base + pool); ++k) workers.emplace_back(run_chain, k);
      for (auto& w : workers) w.join();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int k = 0; k < config.chains; ++k) {
    long nd = 0;
    for (auto d : out.stats[k].divergent) nd += d;
    if (nd * 10 > config.samples * 9)
      fail(Errc::all_divergent, "chain " + std::to_string(k) + " diverged in " + std::to_string(nd) + "/" +
                                    std::to_string(config.samples) +
                                    " iterations; geometry or gradient looks pathological");
  }
  out.max_tree_depth = config.max_tree_depth;
  return out;
}

RunDiagnosis diagnose_run(const RawDraws& draws) {
  if (draws.n_chains() < 2) fail(Errc::insufficient_chains, "run diagnosis needs at least 2 chains");
  RunDiagnosis d;
  for (const auto& st : draws.stats) {
    int nd = 0, nh = 0;
    for (auto f : st.divergent) nd += f;
    for (auto t : st.tree_depth) nh += (t >= draws.max_tree_depth) ? 1 : 0;
    d.divergences_per_chain.push_back(nd);
    d.max_depth_hits_per_chain.push_back(nh);
    d.total_divergences += nd;
    d.total_max_depth_hits += nh;

    // E-BFMI: mean squared energy increment over energy variance
    const auto& e = st.energy;
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    double var = 0.0, inc = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      var += (e[i] - mean) * (e[i] - mean);
      if (i > 0) inc += (e[i] - e[i - 1]) * (e[i] - e[i - 1]);
    }
    var /= std::max<double>(1.0, static_cast<double>(e.size() - 1));
    double ebfmi = var > 0 ? (inc / static_cast<double>(e.size() - 1)) / var : 0.0;
    d.ebfmi_per_chain.push_back(ebfmi);
    if (ebfmi < 0.2) d.energy_flag = true;
  }
  return d;
}

}  // namespace seroifr
