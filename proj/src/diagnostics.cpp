#include "seroifr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "seroifr/common.hpp"

namespace seroifr {

namespace {

double chain_mean(const Eigen::VectorXd& x) { return x.mean(); }

double chain_var(const Eigen::VectorXd& x) {
  double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

// lag-t autocovariance with divisor n
double autocov(const Eigen::VectorXd& x, double mean, int t) {
  const int n = static_cast<int>(x.size());
  double s = 0.0;
  for (int i = 0; i + t < n; ++i) s += (x[i] - mean) * (x[i + t] - mean);
  return s / static_cast<double>(n);
}

void check_chains(const std::vector<Eigen::VectorXd>& chains, int min_len) {
  if (chains.size() < 2) fail(Errc::insufficient_chains, "need at least 2 chains");
  for (const auto& c : chains)
    if (c.size() < min_len)
      fail(Errc::insufficient_draws, "chains must have at least " + std::to_string(min_len) + " draws");
  for (const auto& c : chains)
    if (c.size() != chains.front().size())
      fail(Errc::insufficient_draws, "chains must have equal length");
}

}  // namespace

std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& c : chains) {
    Eigen::Index h = c.size() / 2;
    out.push_back(c.head(h));
    out.push_back(c.tail(h));
  }
  return out;
}

std::optional<double> split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  check_chains(chains, 4);
  auto halves = split_halves(chains);
  const int m = static_cast<int>(halves.size());
  const double n = static_cast<double>(halves.front().size());

  double w = 0.0;
  Eigen::VectorXd means(m);
  for (int j = 0; j < m; ++j) {
    means[j] = chain_mean(halves[j]);
    w += chain_var(halves[j]);
  }
  w /= m;
  double grand = means.mean();
  double b_over_n = (means.array() - grand).square().sum() / static_cast<double>(m - 1);  // B/n
  if (!(w > 0.0)) return std::nullopt;  // zero variance: statistic undefined
  double var_plus = (n - 1.0) / n * w + b_over_n;
  return std::sqrt(var_plus / w);
}

std::optional<double> ess(const std::vector<Eigen::VectorXd>& chains) {
  check_chains(chains, 8);
  const int m = static_cast<int>(chains.size());
  const int n = static_cast<int>(chains.front().size());
  const double total = static_cast<double>(m) * static_cast<double>(n);

  Eigen::VectorXd means(m), vars(m);
  for (int j = 0; j < m; ++j) {
    means[j] = chain_mean(chains[j]);
    vars[j] = chain_var(chains[j]);
  }
  double w = vars.mean();
  if (!(w > 0.0)) return std::nullopt;
  double grand = means.mean();
  double b_over_n = (means.array() - grand).square().sum() / static_cast<double>(m - 1);
  double var_plus = (n - 1.0) / static_cast<double>(n) * w + b_over_n;

  auto mean_acov = [&](int t) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += autocov(chains[j], means[j], t);
    return s / m;
  };

  // Geyer initial positive sequence over paired autocorrelations
  std::vector<double> rho(static_cast<std::size_t>(n), 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (w - mean_acov(1)) / var_plus;
  rho[1] = rho_odd;
  int s = 1;
  while (s < n - 4 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (w - mean_acov(s + 1)) / var_plus;
    rho_odd = 1.0 - (w - mean_acov(s + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[s + 1] = rho_even;
      rho[s + 2] = rho_odd;
    }
    s += 2;
  }
  const int max_s = s;
  // retain a trailing positive even term; reduces variance for antithetic chains
  if (rho_even > 0.0) rho[max_s + 1] = rho_even;

  // enforce monotone non-increasing pair sums
  for (int k = 1; k <= max_s - 3; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      double v = 0.5 * (rho[k - 1] + rho[k]);
      rho[k + 1] = v;
      rho[k + 2] = v;
    }
  }

  double tau = -1.0;
  for (int k = 0; k < max_s; ++k) tau += 2.0 * rho[k];
  tau += rho[max_s + 1];

  double cap = 1.5 * total;
  if (!(tau > 0.0)) return cap;
  return std::min(total / tau, cap);
}

ConvergenceReport convergence_report(const std::vector<Eigen::MatrixXd>& chains,
                                     const std::vector<std::string>& names,
                                     const std::vector<std::string>& groups,
                                     ConvergenceThresholds thresholds) {
  if (chains.empty() || chains.front().rows() == 0) fail(Errc::no_draws, "no draws to diagnose");
  if (chains.size() < 2) fail(Errc::insufficient_chains, "convergence report needs at least 2 chains");
  const int dim = static_cast<int>(chains.front().cols());
  if (static_cast<int>(names.size()) != dim || static_cast<int>(groups.size()) != dim)
    fail(Errc::bad_config, "names/groups must match the parameter dimension");

  ConvergenceReport rep;
  rep.thresholds = thresholds;
  rep.pass = true;
  std::map<std::string, GroupRange> ranges;

  for (int j = 0; j < dim; ++j) {
    std::vector<Eigen::VectorXd> series;
    for (const auto& ch : chains) series.push_back(ch.col(j));
    ParamDiag d;
    d.name = names[j];
    d.group = groups[j];
    d.rhat = split_rhat(series);
    d.ess = ess(split_halves(series));
    rep.params.push_back(d);

    bool ok = d.rhat && d.ess && *d.rhat <= thresholds.rhat_max && *d.ess >= thresholds.ess_min;
    if (!ok) {
      rep.pass = false;
      rep.failing.push_back(d.name);
    }
    if (d.rhat && d.ess) {
      auto [it, fresh] = ranges.try_emplace(d.group);
      GroupRange& g = it->second;
      if (fresh || *d.rhat < g.rhat_min) g.rhat_min = *d.rhat;
      if (fresh || *d.rhat > g.rhat_max) g.rhat_max = *d.rhat;
      if (fresh || *d.ess < g.ess_min) g.ess_min = *d.ess;
      if (fresh || *d.ess > g.ess_max) g.ess_max = *d.ess;
      g.count += 1;
    }
  }
  for (auto& [name, g] : ranges) rep.groups.emplace_back(name, g);
  return rep;
}

}  // namespace seroifr
