#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace seroifr {

/// Split R-hat for one parameter: each chain is halved (dropping the middle
/// draw of odd-length chains) and the classic potential-scale-reduction
/// statistic is computed over the half-sequences. Returns nullopt when the
/// draws carry no variance (the statistic is undefined, never silently 1).
std::optional<double> split_rhat(const std::vector<Eigen::VectorXd>& chains);

/// Effective sample size from pooled per-chain autocorrelations with the
/// between-chain variance correction, truncated by Geyer's initial monotone
/// sequence criterion. Operates on the chains as given (no internal
/// splitting); capped at 1.5x the total draw count.
std::optional<double> ess(const std::vector<Eigen::VectorXd>& chains);

struct ParamDiag {
  std::string name;
  std::string group;
  std::optional<double> rhat;
  std::optional<double> ess;
};

struct GroupRange {
  double rhat_min = 0, rhat_max = 0;
  double ess_min = 0, ess_max = 0;
  int count = 0;
};

struct ConvergenceThresholds {
  double rhat_max = 1.01;
  double ess_min = 1000.0;
};

struct ConvergenceReport {
  std::vector<ParamDiag> params;
  std::vector<std::pair<std::string, GroupRange>> groups;
  ConvergenceThresholds thresholds;
  bool pass = false;
  std::vector<std::string> failing;  // parameter names violating a threshold (or undefined)
};

/// Per-parameter and per-group convergence summary. Both statistics are
/// computed on split half-chains.
ConvergenceReport convergence_report(const std::vector<Eigen::MatrixXd>& chains,
                                     const std::vector<std::string>& names,
                                     const std::vector<std::string>& groups,
                                     ConvergenceThresholds thresholds = {});

/// Utility: split every chain in half (dropping the middle draw when odd).
std::vector<Eigen::VectorXd> split_halves(const std::vector<Eigen::VectorXd>& chains);

}  // namespace seroifr
