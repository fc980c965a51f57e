#include "seroifr/summaries.hpp"

#include <algorithm>
#include <cmath>

#include "seroifr/common.hpp"
#include "seroifr/distributions.hpp"

namespace seroifr {

namespace {

constexpr double kZ975 = 1.959963984540054;

QuantileSummary summarize(std::vector<double> v) {
  QuantileSummary s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    double h = p * static_cast<double>(v.size() - 1);
    std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
  };
  s.median = q(0.5);
  s.lo95 = q(0.025);
  s.hi95 = q(0.975);
  s.lo80 = q(0.10);
  s.hi80 = q(0.90);
  return s;
}

void require_draws(const PosteriorDraws& draws) {
  if (draws.total_draws() < 100) fail(Errc::insufficient_draws, "need at least 100 retained draws");
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) fail(Errc::no_draws, "quantile of empty data");
  std::sort(values.begin(), values.end());
  double h = p * static_cast<double>(values.size() - 1);
  std::size_t i = static_cast<std::size_t>(h);
  if (i + 1 >= values.size()) return values.back();
  return values[i] + (h - static_cast<double>(i)) * (values[i + 1] - values[i]);
}

CurveSummary curve_summary(const PreparedModel& model, const PosteriorDraws& draws, int loc,
                           CurveKind kind) {
  require_draws(draws);
  CurveSummary out;
  out.location_id = draws.layout.location_ids().at(static_cast<std::size_t>(loc));
  out.kind = kind;
  Eigen::MatrixXd all = draws.stacked();
  const int n = static_cast<int>(all.rows());
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (int age = 0; age <= 100; ++age) {
    for (int d = 0; d < n; ++d)
      vals[d] = kind == CurveKind::sero ? model.prevalence_at(all.row(d).transpose(), loc, age)
                                        : model.ifr_at(all.row(d).transpose(), loc, age);
    QuantileSummary q = summarize(vals);
    out.mean.push_back(q.mean);
    out.median.push_back(q.median);
    out.lo95.push_back(q.lo95);
    out.hi95.push_back(q.hi95);
    out.lo80.push_back(q.lo80);
    out.hi80.push_back(q.hi80);
  }
  return out;
}

IfrAtAge ifr_at_age(const PreparedModel& model, const PosteriorDraws& draws, int loc, double age,
                    std::optional<double> benchmark) {
  require_draws(draws);
  Eigen::MatrixXd all = draws.stacked();
  std::vector<double> vals(static_cast<std::size_t>(all.rows()));
  for (Eigen::Index d = 0; d < all.rows(); ++d) vals[d] = model.ifr_at(all.row(d).transpose(), loc, age);
  IfrAtAge out;
  out.q = summarize(std::move(vals));
  if (benchmark) {
    if (out.q.lo95 > *benchmark)
      out.benchmark_flag = "ABOVE";
    else if (out.q.hi95 < *benchmark)
      out.benchmark_flag = "BELOW";
    else
      out.benchmark_flag = "OVERLAPS";
  }
  return out;
}

PopulationIfrSummary population_ifr(const PreparedModel& model, const PosteriorDraws& draws, int loc,
                                    const AgeDensity& f, PopIfrMode mode) {
  require_draws(draws);
  auto nodes = model.mesh().nodes(AgeBin::range(0.0, kAgeCeiling));
  const std::size_t m = nodes.ages.size();
  std::vector<double> wf(m);
  for (std::size_t i = 0; i < m; ++i) wf[i] = nodes.weights[i] * f(nodes.ages[i]);

  Eigen::MatrixXd all = draws.stacked();
  std::vector<double> vals(static_cast<std::size_t>(all.rows()));
  for (Eigen::Index d = 0; d < all.rows(); ++d) {
    Eigen::VectorXd row = all.row(d).transpose();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double ifr = model.ifr_at(row, loc, nodes.ages[i]);
      if (mode == PopIfrMode::infection_weighted) {
        double pi = model.prevalence_at(row, loc, nodes.ages[i]);
        num += wf[i] * pi * ifr;
        den += wf[i] * pi;
      } else {
        num += wf[i] * ifr;
        den += wf[i];
      }
    }
    if (den < 1e-12) fail(Errc::zero_infections, "expected infections underflow in population IFR");
    vals[d] = num / den;
  }
  QuantileSummary q = summarize(std::move(vals));
  PopulationIfrSummary out;
  out.location_id = draws.layout.location_ids().at(static_cast<std::size_t>(loc));
  out.mode = "OWN_DISTRIBUTION";
  out.mean = q.mean;
  out.median = q.median;
  out.lo95 = q.lo95;
  out.hi95 = q.hi95;
  return out;
}

AgeDensity standardized_density(const std::vector<AgeDensity>& densities) {
  if (densities.empty()) fail(Errc::no_draws, "no densities to standardize");
  AgeDensity out;
  out.grid_values.resize(101);
  std::vector<double> column(densities.size());
  for (int a = 0; a <= 100; ++a) {
    for (std::size_t l = 0; l < densities.size(); ++l) column[l] = densities[l].grid_values[a];
    out.grid_values[a] = quantile(column, 0.5);
  }
  double integral = out.grid_integral();
  if (integral <= 0) fail(Errc::degenerate_fit, "standardized density has nonpositive mass");
  for (double& v : out.grid_values) v /= integral;
  return out;
}

double rogan_gladen_point(double raw_positivity, double sens, double spec) {
  double slope = sens + spec - 1.0;
  if (!(slope > 0)) fail(Errc::degenerate_test, "sens + spec must exceed 1");
  return std::clamp((raw_positivity + spec - 1.0) / slope, 0.0, 1.0);
}

RoganGladenEstimate rogan_gladen(const SerologyBinObs& obs, double sens, double spec) {
  double raw = static_cast<double>(obs.n_positive) / static_cast<double>(obs.n_tested);
  double se = std::sqrt(raw * (1.0 - raw) / static_cast<double>(obs.n_tested));
  RoganGladenEstimate out;
  out.estimate = rogan_gladen_point(raw, sens, spec);
  out.lo95 = rogan_gladen_point(raw - kZ975 * se, sens, spec);
  out.hi95 = rogan_gladen_point(raw + kZ975 * se, sens, spec);
  return out;
}

double naive_ifr(const DeathBinObs& death_bin, double population, double rg_prevalence) {
  if (!(population > 0)) fail(Errc::count_violation, "population must be positive");
  if (!(rg_prevalence > 0)) fail(Errc::zero_prevalence, "Rogan-Gladen prevalence is zero");
  return (static_cast<double>(death_bin.deaths) / population) / rg_prevalence;
}

}  // namespace seroifr
