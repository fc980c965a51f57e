#pragma once

#include <string>
#include <vector>

#include "seroifr/layout.hpp"
#include "seroifr/sampler.hpp"

namespace seroifr {

/// Posterior draws bound to a parameter layout: raw unconstrained chains plus
/// the constrained (model-scale) view used by diagnostics, summaries and the
/// draws.csv export.
struct PosteriorDraws {
  ParameterLayout layout;
  RawDraws raw;
  std::vector<Eigen::MatrixXd> constrained;  // per chain, samples x dim
  std::vector<std::string> names;            // constrained column names

  int n_chains() const { return static_cast<int>(constrained.size()); }
  int n_samples() const { return constrained.empty() ? 0 : static_cast<int>(constrained.front().rows()); }
  int total_draws() const { return n_chains() * n_samples(); }

  /// All chains stacked, chain-major.
  Eigen::MatrixXd stacked() const;
};

PosteriorDraws make_posterior_draws(const ParameterLayout& layout, RawDraws raw);

/// Draws rebuilt from a stored constrained table (e.g. read back from
/// draws.csv); raw chains and stats are empty.
PosteriorDraws posterior_draws_from_constrained(const ParameterLayout& layout,
                                                std::vector<Eigen::MatrixXd> constrained);

}  // namespace seroifr
