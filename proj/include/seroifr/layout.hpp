#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "seroifr/dataset.hpp"
#include "seroifr/model_spec.hpp"

namespace seroifr {

/// Index map for the full parameter vector. The unconstrained storage holds,
/// in block order: per-location serology intercepts gamma0, per-location
/// serology spline coefficients gamma, per-location IFR coefficients (raw
/// standardized offsets when non-centered, coefficient values when centered),
/// global IFR coefficients, per-country intercept adjustments (offsets or
/// values), log sigma for each IFR coefficient, log sigma_country, and logit
/// sensitivity/specificity per sampled test. Tests held fixed by the model
/// spec are excluded. The IFR blocks exist only when the dataset contains at
/// least one death observation.
///
/// The constrained view has the same dimension and block structure but holds
/// the quantities the model is written in: reconstructed per-location and
/// per-country IFR coefficients, positive sigmas, and sens/spec proportions.
class ParameterLayout {
 public:
  static ParameterLayout create(const StudyDataset& data, const ModelSpec& spec);
  /// Explicit covariate dimensions (for custom covariate sets).
  static ParameterLayout create(const StudyDataset& data, const ModelSpec& spec, int sero_dim, int ifr_dim);

  int dim() const { return dim_; }
  int n_locations() const { return n_loc_; }
  int n_countries() const { return n_country_; }
  int n_sampled_tests() const { return static_cast<int>(test_ids_.size()); }
  int sero_dim() const { return sero_dim_; }
  int ifr_dim() const { return ifr_dim_; }
  bool has_ifr_block() const { return has_ifr_; }
  bool non_centered() const { return non_centered_; }

  const std::vector<std::string>& location_ids() const { return location_ids_; }
  const std::vector<std::string>& country_ids() const { return country_ids_; }
  const std::vector<std::string>& sampled_test_ids() const { return test_ids_; }
  int country_of(int loc) const { return country_of_[loc]; }

  int idx_gamma0(int l) const { return l; }
  int idx_gamma(int l, int j) const { return n_loc_ + l * sero_dim_ + j; }
  int idx_beta_loc(int l, int i) const { return beta_loc_off_ + l * (ifr_dim_ + 1) + i; }
  int idx_beta_global(int i) const { return beta_global_off_ + i; }
  int idx_beta_country(int c) const { return beta_country_off_ + c; }
  int idx_sigma(int i) const { return sigma_off_ + i; }
  int idx_sigma_country() const { return sigma_country_off_; }
  int idx_sens(int t) const { return test_off_ + 2 * t; }
  int idx_spec(int t) const { return test_off_ + 2 * t + 1; }

  Eigen::VectorXd to_constrained(const Eigen::VectorXd& u) const;
  Eigen::VectorXd from_constrained(const Eigen::VectorXd& c) const;

  /// Column names of the constrained view (also used in draws.csv).
  std::vector<std::string> names() const;
  /// Diagnostic group of a parameter: gamma, beta_loc, beta_global,
  /// beta_country, sigma, sens or spec.
  std::string group(int index) const;
  static std::string group_of_name(const std::string& name);

 private:
  int n_loc_ = 0, n_country_ = 0;
  int sero_dim_ = 0, ifr_dim_ = 0;
  bool has_ifr_ = false, non_centered_ = true;
  int beta_loc_off_ = 0, beta_global_off_ = 0, beta_country_off_ = 0;
  int sigma_off_ = 0, sigma_country_off_ = 0, test_off_ = 0;
  int dim_ = 0;
  std::vector<std::string> location_ids_, country_ids_, test_ids_;
  std::vector<int> country_of_;
};

}  // namespace seroifr
