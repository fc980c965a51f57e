#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

#include "seroifr/age_density.hpp"
#include "seroifr/dataset.hpp"
#include "seroifr/layout.hpp"
#include "seroifr/model_spec.hpp"
#include "seroifr/quadrature.hpp"

namespace seroifr {

struct LogDensityResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Test positivity given true seroprevalence and the assay characteristics.
inline double positivity(double pi, double sens, double spec) {
  return pi * sens + (1.0 - pi) * (1.0 - spec);
}

/// Population-weighted average of g over the bin:
/// trapz(g * f) / trapz(f) on the shared mesh.
double bin_average(const std::function<double(double)>& g, const AgeDensity& f, const AgeBin& bin,
                   const QuadratureMesh& mesh = {});

/// Age covariate row for the regression curves (spline basis by default; any
/// age-indexed covariates can be plugged in).
struct AgeCovariates {
  int dim = 0;
  std::function<Eigen::VectorXd(double)> eval;  // returns a vector of length dim
};

/// Immutable, reentrant evaluation context: quadrature nodes, density
/// weights and covariate rows are computed once; log_posterior evaluations
/// are pure and safe to run concurrently.
class PreparedModel {
 public:
  PreparedModel(StudyDataset data, std::vector<AgeDensity> densities, ModelSpec spec);
  PreparedModel(StudyDataset data, std::vector<AgeDensity> densities, ModelSpec spec,
                AgeCovariates sero_cov, AgeCovariates ifr_cov);

  const ParameterLayout& layout() const { return layout_; }
  const StudyDataset& data() const { return data_; }
  const ModelSpec& spec() const { return spec_; }
  const std::vector<AgeDensity>& densities() const { return densities_; }
  const QuadratureMesh& mesh() const { return mesh_; }

  /// Joint log-posterior (likelihoods + priors + transform jacobians) and its
  /// exact gradient, both on the unconstrained scale. Returns -inf value when
  /// the likelihood degenerates at extreme parameters; throws non_finite only
  /// on NaN, which indicates a data or mesh bug.
  LogDensityResult log_posterior(const Eigen::VectorXd& unconstrained) const;

  /// Curves evaluated from a constrained parameter vector.
  double prevalence_at(const Eigen::VectorXd& constrained, int loc, double age) const;
  double ifr_at(const Eigen::VectorXd& constrained, int loc, double age) const;

  /// (sens, spec) for the assay used at a location, reading sampled values
  /// from the constrained vector and fixed ones from the model spec.
  std::pair<double, double> test_characteristics(const Eigen::VectorXd& constrained, int loc) const;

  /// Forward-simulate serology positives, control counts and deaths from the
  /// model at the given constrained parameters. Deterministic given seed.
  StudyDataset simulate(const Eigen::VectorXd& constrained, std::uint64_t seed) const;

 private:
  struct SeroBin {
    long n = 0, pos = 0;
    double log_coeff = 0.0;
    Eigen::VectorXd wn;  // density-weighted quadrature weights, normalized to sum 1
    Eigen::MatrixXd z;   // nodes x sero_dim
  };
  struct DeathBin {
    long deaths = 0;
    double neg_log_fact = 0.0;
    double n_pop = 0.0;  // expected population count in the bin
    Eigen::VectorXd wn;
    Eigen::MatrixXd z;  // nodes x sero_dim (pi enters the death rate)
    Eigen::MatrixXd x;  // nodes x ifr_dim
  };
  struct LocData {
    std::vector<SeroBin> sero;
    std::vector<DeathBin> death;
    int sampled_test = -1;       // index into layout's sampled tests, or -1
    double fixed_sens = 1.0, fixed_spec = 1.0;
  };

  void prepare();
  double add_priors(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const;

  StudyDataset data_;
  std::vector<AgeDensity> densities_;
  ModelSpec spec_;
  QuadratureMesh mesh_;
  AgeCovariates sero_cov_, ifr_cov_;
  ParameterLayout layout_;
  std::vector<LocData> locs_;
  std::vector<TestValidation> test_val_;  // parallel to layout's sampled tests
  std::vector<double> test_logc_;
  double log_beta_sens_ = 0.0, log_beta_spec_ = 0.0;
};

}  // namespace seroifr
