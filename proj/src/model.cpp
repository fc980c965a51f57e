#include "seroifr/model.hpp"

#include <cmath>
#include <limits>

#include "seroifr/common.hpp"
#include "seroifr/distributions.hpp"
#include "seroifr/rng.hpp"
#include "seroifr/spline.hpp"

namespace seroifr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

AgeCovariates covariates_from_knots(const NaturalSplineDef& def, bool enabled) {
  if (!enabled) return AgeCovariates{0, nullptr};
  NaturalCubicBasis basis(def);
  return AgeCovariates{basis.dim(), [basis](double age) { return basis(age); }};
}

}  // namespace

double bin_average(const std::function<double(double)>& g, const AgeDensity& f, const AgeBin& bin,
                   const QuadratureMesh& mesh) {
  auto nodes = mesh.nodes(bin);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nodes.ages.size(); ++i) {
    double wf = nodes.weights[i] * f(nodes.ages[i]);
    num += wf * g(nodes.ages[i]);
    den += wf;
  }
  if (den < 1e-12) fail(Errc::zero_mass_bin, "density mass underflows over bin " + bin.describe());
  return num / den;
}

PreparedModel::PreparedModel(StudyDataset data, std::vector<AgeDensity> densities, ModelSpec spec)
    : PreparedModel(std::move(data), std::move(densities), spec,
                    covariates_from_knots(spec.sero_knots, spec.sero_spline),
                    covariates_from_knots(spec.ifr_knots, spec.ifr_spline)) {}

PreparedModel::PreparedModel(StudyDataset data, std::vector<AgeDensity> densities, ModelSpec spec,
                             AgeCovariates sero_cov, AgeCovariates ifr_cov)
    : data_(std::move(data)),
      densities_(std::move(densities)),
      spec_(std::move(spec)),
      mesh_{spec_.mesh_step},
      sero_cov_(std::move(sero_cov)),
      ifr_cov_(std::move(ifr_cov)) {
  prepare();
}

void PreparedModel::prepare() {
  spec_.validate();
  if (densities_.size() != data_.locations.size())
    fail(Errc::schema_violation, "need one age density per location");
  for (const auto& f : densities_) f.validate();

  layout_ = ParameterLayout::create(data_, spec_, sero_cov_.dim, ifr_cov_.dim);

  const PriorSpec& pr = spec_.priors;
  log_beta_sens_ = std::lgamma(pr.sens_a) + std::lgamma(pr.sens_b) - std::lgamma(pr.sens_a + pr.sens_b);
  log_beta_spec_ = std::lgamma(pr.spec_a) + std::lgamma(pr.spec_b) - std::lgamma(pr.spec_a + pr.spec_b);
  for (const auto& id : layout_.sampled_test_ids()) {
    const TestValidation& v = data_.tests[static_cast<std::size_t>(data_.test_index(id))];
    test_val_.push_back(v);
    test_logc_.push_back(binomial_log_coeff(v.n_sens, v.x_sens) + binomial_log_coeff(v.n_spec, v.x_spec));
  }

  const int J = layout_.sero_dim();
  const int Q = layout_.ifr_dim();
  for (std::size_t l = 0; l < data_.locations.size(); ++l) {
    const auto& loc = data_.locations[l];
    const auto& f = densities_[l];
    LocData ld;
    auto fixed = spec_.fixed_tests.find(loc.test_id);
    if (fixed != spec_.fixed_tests.end()) {
      ld.fixed_sens = fixed->second.first;
      ld.fixed_spec = fixed->second.second;
    } else {
      const auto& ids = layout_.sampled_test_ids();
      for (std::size_t t = 0; t < ids.size(); ++t)
        if (ids[t] == loc.test_id) ld.sampled_test = static_cast<int>(t);
      if (ld.sampled_test < 0)
        fail(Errc::referential_integrity, "location '" + loc.location_id + "' references unknown test");
    }

    auto weights_for = [&](const AgeBin& bin, Eigen::VectorXd& wn, double& mass) {
      auto nodes = mesh_.nodes(bin);
      int m = static_cast<int>(nodes.ages.size());
      wn.resize(m);
      mass = 0.0;
      for (int i = 0; i < m; ++i) {
        wn[i] = nodes.weights[i] * f(nodes.ages[i]);
        mass += wn[i];
      }
      if (mass < 1e-12)
        fail(Errc::zero_mass_bin, "location '" + loc.location_id + "': density mass underflows over bin " +
                                      bin.describe());
      wn /= mass;
      return nodes;
    };

    for (const auto& obs : loc.serology) {
      SeroBin b;
      b.n = obs.n_tested;
      b.pos = obs.n_positive;
      b.log_coeff = binomial_log_coeff(b.n, b.pos);
      double mass = 0.0;
      auto nodes = weights_for(obs.bin, b.wn, mass);
      b.z.resize(J, b.wn.size());
      for (int i = 0; i < b.wn.size(); ++i)
        if (J > 0) b.z.col(i) = sero_cov_.eval(nodes.ages[i]);
      ld.sero.push_back(std::move(b));
    }
    for (const auto& obs : loc.deaths) {
      DeathBin b;
      b.deaths = obs.deaths;
      b.neg_log_fact = -std::lgamma(static_cast<double>(b.deaths) + 1.0);
      double mass = 0.0;
      auto nodes = weights_for(obs.bin, b.wn, mass);
      b.n_pop = loc.total_population * mass;
      b.z.resize(J, b.wn.size());
      b.x.resize(Q, b.wn.size());
      for (int i = 0; i < b.wn.size(); ++i) {
        if (J > 0) b.z.col(i) = sero_cov_.eval(nodes.ages[i]);
        if (Q > 0) b.x.col(i) = ifr_cov_.eval(nodes.ages[i]);
      }
      ld.death.push_back(std::move(b));
    }
    locs_.push_back(std::move(ld));
  }
}

LogDensityResult PreparedModel::log_posterior(const Eigen::VectorXd& u) const {
  const int D = layout_.dim();
  if (u.size() != D) fail(Errc::bad_config, "parameter vector has wrong dimension");
  LogDensityResult out;
  out.gradient = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd& grad = out.gradient;
  double value = 0.0;

  const int L = layout_.n_locations();
  const int C = layout_.n_countries();
  const int J = layout_.sero_dim();
  const int Q = layout_.ifr_dim();
  const int T = layout_.n_sampled_tests();
  const bool ifr = layout_.has_ifr_block();
  const bool nc = layout_.non_centered();

  // test characteristics on the probability scale
  Eigen::VectorXd sens(T), one_m_sens(T), spec(T), one_m_spec(T);
  Eigen::VectorXd d_sens = Eigen::VectorXd::Zero(T), d_spec = Eigen::VectorXd::Zero(T);
  for (int t = 0; t < T; ++t) {
    double us = u[layout_.idx_sens(t)], uc = u[layout_.idx_spec(t)];
    sens[t] = inv_logit(us);
    one_m_sens[t] = inv_logit(-us);
    spec[t] = inv_logit(uc);
    one_m_spec[t] = inv_logit(-uc);
  }

  // reconstruct per-location and per-country IFR coefficients
  double sigma_country = 1.0;
  Eigen::VectorXd sigma, beta_country, d_beta_country;
  Eigen::MatrixXd beta;  // (Q+1) x L
  if (ifr) {
    sigma_country = std::exp(u[layout_.idx_sigma_country()]);
    sigma.resize(Q + 1);
    for (int i = 0; i <= Q; ++i) sigma[i] = std::exp(u[layout_.idx_sigma(i)]);
    beta_country.resize(C);
    d_beta_country = Eigen::VectorXd::Zero(C);
    beta.resize(Q + 1, L);
    for (int k = 0; k < C; ++k)
      beta_country[k] = nc ? sigma_country * u[layout_.idx_beta_country(k)] : u[layout_.idx_beta_country(k)];
    for (int l = 0; l < L; ++l)
      for (int i = 0; i <= Q; ++i) {
        double raw = u[layout_.idx_beta_loc(l, i)];
        beta(i, l) = nc ? u[layout_.idx_beta_global(i)] + (i == 0 ? beta_country[layout_.country_of(l)] : 0.0) +
                              sigma[i] * raw
                        : raw;
      }
    if (!beta.allFinite()) {
      out.value = kNegInf;
      grad.setZero();
      return out;
    }
  }
  Eigen::MatrixXd d_beta = Eigen::MatrixXd::Zero(ifr ? Q + 1 : 0, ifr ? L : 0);

  // node-sized scratch, reused across bins
  Eigen::ArrayXd pi, w2, rr, qq, tt;
  Eigen::VectorXd zw(J), xw(Q);

  for (int l = 0; l < L; ++l) {
    const LocData& ld = locs_[l];
    const double gamma0 = u[layout_.idx_gamma0(l)];
    Eigen::VectorXd gamma;
    if (J > 0) gamma = u.segment(layout_.idx_gamma(l, 0), J);

    const int ti = ld.sampled_test;
    const double s = ti >= 0 ? sens[ti] : ld.fixed_sens;
    const double oms = ti >= 0 ? one_m_sens[ti] : 1.0 - ld.fixed_sens;
    const double cc = ti >= 0 ? spec[ti] : ld.fixed_spec;
    const double omc = ti >= 0 ? one_m_spec[ti] : 1.0 - ld.fixed_spec;

    for (const SeroBin& b : ld.sero) {
      if (J > 0)
        pi = 1.0 / (1.0 + (-gamma0 - (b.z.transpose() * gamma).array()).exp());
      else
        pi = Eigen::ArrayXd::Constant(b.wn.size(), inv_logit(gamma0));
      double pibar = (b.wn.array() * pi).sum();
      w2 = b.wn.array() * pi * (1.0 - pi);
      double p = s * pibar + omc * (1.0 - pibar);
      double q = oms * pibar + cc * (1.0 - pibar);  // 1 - p, computed without cancellation
      if ((b.pos > 0 && !(p > 0)) || (b.n - b.pos > 0 && !(q > 0))) {
        out.value = kNegInf;
        grad.setZero();
        return out;
      }
      value += b.log_coeff;
      if (b.pos > 0) value += static_cast<double>(b.pos) * std::log(p);
      if (b.pos < b.n) value += static_cast<double>(b.n - b.pos) * std::log(q);
      double d_p = (b.pos > 0 ? static_cast<double>(b.pos) / p : 0.0) -
                   (b.pos < b.n ? static_cast<double>(b.n - b.pos) / q : 0.0);
      double d_pibar = d_p * (s - omc);  // s + spec - 1
      grad[layout_.idx_gamma0(l)] += d_pibar * w2.sum();
      if (J > 0) grad.segment(layout_.idx_gamma(l, 0), J) += d_pibar * (b.z * w2.matrix());
      if (ti >= 0) {
        d_sens[ti] += d_p * pibar;
        d_spec[ti] += d_p * (pibar - 1.0);
      }
    }

    if (!ifr) continue;
    const double beta0 = beta(0, l);
    Eigen::VectorXd beta_s;
    if (Q > 0) beta_s = beta.col(l).tail(Q);
    for (const DeathBin& b : ld.death) {
      if (J > 0)
        pi = 1.0 / (1.0 + (-gamma0 - (b.z.transpose() * gamma).array()).exp());
      else
        pi = Eigen::ArrayXd::Constant(b.wn.size(), inv_logit(gamma0));
      if (Q > 0)
        rr = (beta0 + (b.x.transpose() * beta_s).array()).exp();
      else
        rr = Eigen::ArrayXd::Constant(b.wn.size(), std::exp(beta0));
      qq = b.wn.array() * pi * rr;
      double sq = qq.sum();
      double lambda = b.n_pop * sq;
      if (!std::isfinite(lambda) || (b.deaths > 0 && !(lambda > 0))) {
        out.value = kNegInf;
        grad.setZero();
        return out;
      }
      tt = qq * (1.0 - pi);
      value += b.neg_log_fact - lambda;
      if (b.deaths > 0) value += static_cast<double>(b.deaths) * std::log(lambda);
      double d_lam = (b.deaths > 0 ? static_cast<double>(b.deaths) / lambda : 0.0) - 1.0;
      double scale = d_lam * b.n_pop;
      d_beta(0, l) += scale * sq;
      if (Q > 0) d_beta.col(l).tail(Q) += scale * (b.x * qq.matrix());
      grad[layout_.idx_gamma0(l)] += scale * tt.sum();
      if (J > 0) grad.segment(layout_.idx_gamma(l, 0), J) += scale * (b.z * tt.matrix());
    }
  }

  // test validation likelihood (tests held fixed contribute only a constant)
  for (int t = 0; t < T; ++t) {
    const TestValidation& v = test_val_[t];
    double us = u[layout_.idx_sens(t)], uc = u[layout_.idx_spec(t)];
    value += test_logc_[t];
    value += static_cast<double>(v.x_sens) * log_inv_logit(us) +
             static_cast<double>(v.n_sens - v.x_sens) * log_inv_logit(-us);
    value += static_cast<double>(v.x_spec) * log_inv_logit(uc) +
             static_cast<double>(v.n_spec - v.x_spec) * log_inv_logit(-uc);
    grad[layout_.idx_sens(t)] += static_cast<double>(v.x_sens) - static_cast<double>(v.n_sens) * sens[t];
    grad[layout_.idx_spec(t)] += static_cast<double>(v.x_spec) - static_cast<double>(v.n_spec) * spec[t];
  }

  // chain the reconstructed-coefficient gradients back to stored parameters
  if (ifr) {
    Eigen::VectorXd d_sigma = Eigen::VectorXd::Zero(Q + 1);
    double d_sigma_country = 0.0;
    for (int l = 0; l < L; ++l)
      for (int i = 0; i <= Q; ++i) {
        double db = d_beta(i, l);
        if (nc) {
          grad[layout_.idx_beta_loc(l, i)] += db * sigma[i];
          grad[layout_.idx_beta_global(i)] += db;
          d_sigma[i] += db * u[layout_.idx_beta_loc(l, i)];
          if (i == 0) d_beta_country[layout_.country_of(l)] += db;
        } else {
          grad[layout_.idx_beta_loc(l, i)] += db;
        }
      }
    if (nc)
      for (int k = 0; k < C; ++k) {
        grad[layout_.idx_beta_country(k)] += d_beta_country[k] * sigma_country;
        d_sigma_country += d_beta_country[k] * u[layout_.idx_beta_country(k)];
      }
    for (int i = 0; i <= Q; ++i) grad[layout_.idx_sigma(i)] += d_sigma[i] * sigma[i];
    grad[layout_.idx_sigma_country()] += d_sigma_country * sigma_country;
  }

  // sens/spec likelihood gradients through the logit transform
  for (int t = 0; t < T; ++t) {
    grad[layout_.idx_sens(t)] += d_sens[t] * sens[t] * one_m_sens[t];
    grad[layout_.idx_spec(t)] += d_spec[t] * spec[t] * one_m_spec[t];
  }

  if (!spec_.flat_priors) value += add_priors(u, grad);

  if (std::isnan(value))
    fail(Errc::non_finite, "log posterior evaluated to NaN at interior parameters; check data and mesh");
  if (!grad.allFinite()) {
    out.value = kNegInf;
    grad.setZero();
    return out;
  }
  out.value = value;
  return out;
}

double PreparedModel::add_priors(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const {
  const PriorSpec& pr = spec_.priors;
  const int L = layout_.n_locations();
  const int C = layout_.n_countries();
  const int J = layout_.sero_dim();
  const int Q = layout_.ifr_dim();
  const bool nc = layout_.non_centered();
  double value = 0.0;

  for (int l = 0; l < L; ++l) {
    double g0 = u[layout_.idx_gamma0(l)];
    value += normal_lpdf(g0, pr.gamma0_mean, pr.gamma0_sd);
    grad[layout_.idx_gamma0(l)] -= (g0 - pr.gamma0_mean) / (pr.gamma0_sd * pr.gamma0_sd);
    for (int j = 0; j < J; ++j) {
      double gj = u[layout_.idx_gamma(l, j)];
      value += normal_lpdf(gj, 0.0, pr.gamma_sd);
      grad[layout_.idx_gamma(l, j)] -= gj / (pr.gamma_sd * pr.gamma_sd);
    }
  }

  if (layout_.has_ifr_block()) {
    double sigma_country = std::exp(u[layout_.idx_sigma_country()]);
    Eigen::VectorXd sigma(Q + 1);
    for (int i = 0; i <= Q; ++i) sigma[i] = std::exp(u[layout_.idx_sigma(i)]);
    Eigen::VectorXd d_sigma = Eigen::VectorXd::Zero(Q + 1);
    double d_sigma_country = 0.0;

    for (int i = 0; i <= Q; ++i) {
      double bg = u[layout_.idx_beta_global(i)];
      value += normal_lpdf(bg, pr.beta_global_mean, pr.beta_global_sd);
      grad[layout_.idx_beta_global(i)] -= (bg - pr.beta_global_mean) / (pr.beta_global_sd * pr.beta_global_sd);
    }

    if (nc) {
      // standardized offsets
      for (int l = 0; l < L; ++l)
        for (int i = 0; i <= Q; ++i) {
          double e = u[layout_.idx_beta_loc(l, i)];
          value += normal_lpdf(e, 0.0, 1.0);
          grad[layout_.idx_beta_loc(l, i)] -= e;
        }
      for (int k = 0; k < C; ++k) {
        double e = u[layout_.idx_beta_country(k)];
        value += normal_lpdf(e, 0.0, 1.0);
        grad[layout_.idx_beta_country(k)] -= e;
      }
    } else {
      for (int l = 0; l < L; ++l)
        for (int i = 0; i <= Q; ++i) {
          double b = u[layout_.idx_beta_loc(l, i)];
          double mean = u[layout_.idx_beta_global(i)] +
                        (i == 0 ? u[layout_.idx_beta_country(layout_.country_of(l))] : 0.0);
          double z = (b - mean) / sigma[i];
          value += normal_lpdf(b, mean, sigma[i]);
          grad[layout_.idx_beta_loc(l, i)] -= z / sigma[i];
          grad[layout_.idx_beta_global(i)] += z / sigma[i];
          if (i == 0) grad[layout_.idx_beta_country(layout_.country_of(l))] += z / sigma[i];
          d_sigma[i] += (z * z - 1.0) / sigma[i];
        }
      for (int k = 0; k < C; ++k) {
        double b = u[layout_.idx_beta_country(k)];
        double z = b / sigma_country;
        value += normal_lpdf(b, 0.0, sigma_country);
        grad[layout_.idx_beta_country(k)] -= z / sigma_country;
        d_sigma_country += (z * z - 1.0) / sigma_country;
      }
    }

    // half-normal priors on the scales plus the log-transform jacobians
    for (int i = 0; i <= Q; ++i) {
      value += half_normal_lpdf(sigma[i], pr.sigma_scale) + u[layout_.idx_sigma(i)];
      d_sigma[i] -= sigma[i] / (pr.sigma_scale * pr.sigma_scale);
      grad[layout_.idx_sigma(i)] += d_sigma[i] * sigma[i] + 1.0;
    }
    value += half_normal_lpdf(sigma_country, pr.sigma_scale) + u[layout_.idx_sigma_country()];
    d_sigma_country -= sigma_country / (pr.sigma_scale * pr.sigma_scale);
    grad[layout_.idx_sigma_country()] += d_sigma_country * sigma_country + 1.0;
  }

  for (int t = 0; t < layout_.n_sampled_tests(); ++t) {
    double us = u[layout_.idx_sens(t)], uc = u[layout_.idx_spec(t)];
    double s = inv_logit(us), c = inv_logit(uc);
    // beta prior plus logit jacobian, written on the unconstrained scale
    value += (pr.sens_a - 1.0) * log_inv_logit(us) + (pr.sens_b - 1.0) * log_inv_logit(-us) - log_beta_sens_;
    value += (pr.spec_a - 1.0) * log_inv_logit(uc) + (pr.spec_b - 1.0) * log_inv_logit(-uc) - log_beta_spec_;
    value += log_inv_logit(us) + log_inv_logit(-us);
    value += log_inv_logit(uc) + log_inv_logit(-uc);
    grad[layout_.idx_sens(t)] += (pr.sens_a - 1.0) * (1.0 - s) - (pr.sens_b - 1.0) * s + (1.0 - 2.0 * s);
    grad[layout_.idx_spec(t)] += (pr.spec_a - 1.0) * (1.0 - c) - (pr.spec_b - 1.0) * c + (1.0 - 2.0 * c);
  }
  return value;
}

double PreparedModel::prevalence_at(const Eigen::VectorXd& constrained, int loc, double age) const {
  double eta = constrained[layout_.idx_gamma0(loc)];
  if (layout_.sero_dim() > 0)
    eta += sero_cov_.eval(age).dot(constrained.segment(layout_.idx_gamma(loc, 0), layout_.sero_dim()));
  return inv_logit(eta);
}

double PreparedModel::ifr_at(const Eigen::VectorXd& constrained, int loc, double age) const {
  if (!layout_.has_ifr_block()) fail(Errc::bad_config, "model has no IFR block (no death data)");
  double v = constrained[layout_.idx_beta_loc(loc, 0)];
  if (layout_.ifr_dim() > 0)
    v += ifr_cov_.eval(age).dot(constrained.segment(layout_.idx_beta_loc(loc, 1), layout_.ifr_dim()));
  return std::exp(v);
}

std::pair<double, double> PreparedModel::test_characteristics(const Eigen::VectorXd& constrained,
                                                              int loc) const {
  const LocData& ld = locs_[loc];
  if (ld.sampled_test >= 0)
    return {constrained[layout_.idx_sens(ld.sampled_test)], constrained[layout_.idx_spec(ld.sampled_test)]};
  return {ld.fixed_sens, ld.fixed_spec};
}

StudyDataset PreparedModel::simulate(const Eigen::VectorXd& constrained, std::uint64_t seed) const {
  StudyDataset out = data_;
  Rng rng(seed);

  for (auto& t : out.tests) {
    double s, c;
    auto fixed = spec_.fixed_tests.find(t.test_id);
    if (fixed != spec_.fixed_tests.end()) {
      s = fixed->second.first;
      c = fixed->second.second;
    } else {
      int ti = -1;
      const auto& ids = layout_.sampled_test_ids();
      for (std::size_t k = 0; k < ids.size(); ++k)
        if (ids[k] == t.test_id) ti = static_cast<int>(k);
      s = constrained[layout_.idx_sens(ti)];
      c = constrained[layout_.idx_spec(ti)];
    }
    t.x_sens = rng.binomial(t.n_sens, s);
    t.x_spec = rng.binomial(t.n_spec, c);
  }

  const int J = layout_.sero_dim();
  const int Q = layout_.ifr_dim();
  for (int l = 0; l < layout_.n_locations(); ++l) {
    auto& loc = out.locations[l];
    const LocData& ld = locs_[l];
    auto [s, c] = test_characteristics(constrained, l);
    double gamma0 = constrained[layout_.idx_gamma0(l)];
    Eigen::VectorXd gamma;
    if (J > 0) gamma = constrained.segment(layout_.idx_gamma(l, 0), J);

    for (std::size_t k = 0; k < loc.serology.size(); ++k) {
      const SeroBin& b = ld.sero[k];
      double pibar = 0.0;
      for (int i = 0; i < b.wn.size(); ++i)
        pibar += b.wn[i] * inv_logit(gamma0 + (J > 0 ? b.z.col(i).dot(gamma) : 0.0));
      loc.serology[k].n_positive = rng.binomial(loc.serology[k].n_tested, positivity(pibar, s, c));
    }

    if (!layout_.has_ifr_block()) continue;
    double beta0 = constrained[layout_.idx_beta_loc(l, 0)];
    Eigen::VectorXd beta_s;
    if (Q > 0) beta_s = constrained.segment(layout_.idx_beta_loc(l, 1), Q);
    for (std::size_t k = 0; k < loc.deaths.size(); ++k) {
      const DeathBin& b = ld.death[k];
      double sq = 0.0;
      for (int i = 0; i < b.wn.size(); ++i) {
        double pi = inv_logit(gamma0 + (J > 0 ? b.z.col(i).dot(gamma) : 0.0));
        double r = std::exp(beta0 + (Q > 0 ? b.x.col(i).dot(beta_s) : 0.0));
        sq += b.wn[i] * pi * r;
      }
      loc.deaths[k].deaths = rng.poisson(b.n_pop * sq);
    }
  }
  return out;
}

}  // namespace seroifr
