#include "seroifr/layout.hpp"

#include <algorithm>
#include <cmath>

#include "seroifr/common.hpp"
#include "seroifr/distributions.hpp"

namespace seroifr {

ParameterLayout ParameterLayout::create(const StudyDataset& data, const ModelSpec& spec) {
  return create(data, spec, spec.sero_spline ? spec.sero_knots.dim() : 0,
                spec.ifr_spline ? spec.ifr_knots.dim() : 0);
}

ParameterLayout ParameterLayout::create(const StudyDataset& data, const ModelSpec& spec, int sero_dim,
                                        int ifr_dim) {
  ParameterLayout lay;
  lay.n_loc_ = static_cast<int>(data.locations.size());
  if (lay.n_loc_ == 0) fail(Errc::schema_violation, "dataset has no locations");
  lay.sero_dim_ = sero_dim;
  lay.ifr_dim_ = ifr_dim;
  lay.has_ifr_ = data.has_deaths();
  lay.non_centered_ = spec.non_centered;

  for (const auto& loc : data.locations) lay.location_ids_.push_back(loc.location_id);
  lay.country_ids_ = data.country_ids();
  lay.n_country_ = static_cast<int>(lay.country_ids_.size());
  for (const auto& loc : data.locations) {
    auto it = std::find(lay.country_ids_.begin(), lay.country_ids_.end(), loc.country_id);
    lay.country_of_.push_back(static_cast<int>(it - lay.country_ids_.begin()));
  }
  for (const auto& t : data.tests)
    if (spec.fixed_tests.find(t.test_id) == spec.fixed_tests.end()) lay.test_ids_.push_back(t.test_id);

  int pos = lay.n_loc_ * (1 + lay.sero_dim_);
  lay.beta_loc_off_ = pos;
  if (lay.has_ifr_) {
    pos += lay.n_loc_ * (lay.ifr_dim_ + 1);
    lay.beta_global_off_ = pos;
    pos += lay.ifr_dim_ + 1;
    lay.beta_country_off_ = pos;
    pos += lay.n_country_;
    lay.sigma_off_ = pos;
    pos += lay.ifr_dim_ + 1;
    lay.sigma_country_off_ = pos;
    pos += 1;
  } else {
    lay.beta_global_off_ = lay.beta_country_off_ = lay.sigma_off_ = lay.sigma_country_off_ = pos;
  }
  lay.test_off_ = pos;
  pos += 2 * static_cast<int>(lay.test_ids_.size());
  lay.dim_ = pos;
  return lay;
}

Eigen::VectorXd ParameterLayout::to_constrained(const Eigen::VectorXd& u) const {
  Eigen::VectorXd c = u;
  if (has_ifr_) {
    double sigma_country = std::exp(u[idx_sigma_country()]);
    c[idx_sigma_country()] = sigma_country;
    for (int i = 0; i <= ifr_dim_; ++i) c[idx_sigma(i)] = std::exp(u[idx_sigma(i)]);
    if (non_centered_) {
      for (int k = 0; k < n_country_; ++k) c[idx_beta_country(k)] = sigma_country * u[idx_beta_country(k)];
      for (int l = 0; l < n_loc_; ++l)
        for (int i = 0; i <= ifr_dim_; ++i) {
          double mean = u[idx_beta_global(i)] + (i == 0 ? c[idx_beta_country(country_of_[l])] : 0.0);
          c[idx_beta_loc(l, i)] = mean + c[idx_sigma(i)] * u[idx_beta_loc(l, i)];
        }
    }
  }
  for (int t = 0; t < n_sampled_tests(); ++t) {
    c[idx_sens(t)] = inv_logit(u[idx_sens(t)]);
    c[idx_spec(t)] = inv_logit(u[idx_spec(t)]);
  }
  return c;
}

Eigen::VectorXd ParameterLayout::from_constrained(const Eigen::VectorXd& c) const {
  Eigen::VectorXd u = c;
  if (has_ifr_) {
    double sigma_country = c[idx_sigma_country()];
    if (!(sigma_country > 0)) fail(Errc::bad_config, "sigma_country must be positive");
    u[idx_sigma_country()] = std::log(sigma_country);
    for (int i = 0; i <= ifr_dim_; ++i) {
      if (!(c[idx_sigma(i)] > 0)) fail(Errc::bad_config, "sigma must be positive");
      u[idx_sigma(i)] = std::log(c[idx_sigma(i)]);
    }
    if (non_centered_) {
      for (int k = 0; k < n_country_; ++k) u[idx_beta_country(k)] = c[idx_beta_country(k)] / sigma_country;
      for (int l = 0; l < n_loc_; ++l)
        for (int i = 0; i <= ifr_dim_; ++i) {
          double mean = c[idx_beta_global(i)] + (i == 0 ? c[idx_beta_country(country_of_[l])] : 0.0);
          u[idx_beta_loc(l, i)] = (c[idx_beta_loc(l, i)] - mean) / c[idx_sigma(i)];
        }
    }
  }
  for (int t = 0; t < n_sampled_tests(); ++t) {
    u[idx_sens(t)] = logit(c[idx_sens(t)]);
    u[idx_spec(t)] = logit(c[idx_spec(t)]);
  }
  return u;
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out(static_cast<std::size_t>(dim_));
  for (int l = 0; l < n_loc_; ++l) {
    out[idx_gamma0(l)] = "gamma0[" + location_ids_[l] + "]";
    for (int j = 0; j < sero_dim_; ++j)
      out[idx_gamma(l, j)] = "gamma[" + location_ids_[l] + "][" + std::to_string(j + 1) + "]";
  }
  if (has_ifr_) {
    for (int l = 0; l < n_loc_; ++l)
      for (int i = 0; i <= ifr_dim_; ++i)
        out[idx_beta_loc(l, i)] = "beta[" + location_ids_[l] + "][" + std::to_string(i) + "]";
    for (int i = 0; i <= ifr_dim_; ++i) out[idx_beta_global(i)] = "beta_global[" + std::to_string(i) + "]";
    for (int k = 0; k < n_country_; ++k) out[idx_beta_country(k)] = "beta_country[" + country_ids_[k] + "]";
    for (int i = 0; i <= ifr_dim_; ++i) out[idx_sigma(i)] = "sigma[" + std::to_string(i) + "]";
    out[idx_sigma_country()] = "sigma_country";
  }
  for (int t = 0; t < n_sampled_tests(); ++t) {
    out[idx_sens(t)] = "sens[" + test_ids_[t] + "]";
    out[idx_spec(t)] = "spec[" + test_ids_[t] + "]";
  }
  return out;
}

std::string ParameterLayout::group(int index) const {
  if (index < n_loc_ * (1 + sero_dim_)) return "gamma";
  if (has_ifr_) {
    if (index < beta_global_off_) return "beta_loc";
    if (index < beta_country_off_) return "beta_global";
    if (index < sigma_off_) return "beta_country";
    if (index < test_off_) return "sigma";
  }
  return (index - test_off_) % 2 == 0 ? "sens" : "spec";
}

std::string ParameterLayout::group_of_name(const std::string& name) {
  auto starts = [&](const char* p) { return name.rfind(p, 0) == 0; };
  if (starts("gamma")) return "gamma";
  if (starts("beta_global")) return "beta_global";
  if (starts("beta_country")) return "beta_country";
  if (starts("beta")) return "beta_loc";
  if (starts("sigma")) return "sigma";
  if (starts("sens")) return "sens";
  if (starts("spec")) return "spec";
  return "other";
}

}  // namespace seroifr
