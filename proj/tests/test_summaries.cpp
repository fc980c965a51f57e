#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "seroifr/common.hpp"
#include "seroifr/distributions.hpp"
#include "seroifr/model.hpp"
#include "seroifr/rng.hpp"
#include "seroifr/summaries.hpp"
#include "support.hpp"

using namespace seroifr;
using test_support::bin;

namespace {

AgeDensity uniform_density() {
  AgeDensity f;
  f.grid_values.assign(101, 1.0);
  double s = f.grid_integral();
  for (double& v : f.grid_values) v /= s;
  return f;
}

// draws where every sample equals the given constrained vector
PosteriorDraws point_mass_draws(const ParameterLayout& lay, const Eigen::VectorXd& c, int n = 150) {
  std::vector<Eigen::MatrixXd> chains;
  Eigen::MatrixXd m(n, lay.dim());
  for (int i = 0; i < n; ++i) m.row(i) = c.transpose();
  chains.push_back(m);
  return posterior_draws_from_constrained(lay, std::move(chains));
}

struct SmallFit {
  PreparedModel model;
  PosteriorDraws draws;
};

SmallFit make_small_fit(std::uint64_t seed) {
  ModelSpec spec;
  StudyDataset d = test_support::make_template_dataset(600, 5e5);
  auto dens = test_support::densities_for(d);
  PreparedModel shell(d, dens, spec);
  StudyDataset sim = shell.simulate(test_support::synthetic_truth(shell.layout()), seed);
  PreparedModel model(sim, dens, spec);
  LogDensityFn target{model.layout().dim(), [&model](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
                        LogDensityResult r = model.log_posterior(q);
                        g = std::move(r.gradient);
                        return r.value;
                      }};
  SamplerConfig cfg;
  cfg.chains = 2;
  cfg.warmup = 400;
  cfg.samples = 500;
  cfg.seed = seed;
  RawDraws raw = nuts_sample(target, cfg);
  PosteriorDraws draws = make_posterior_draws(model.layout(), std::move(raw));
  return {std::move(model), std::move(draws)};
}

}  // namespace

TEST_CASE("curve summaries") {
  ModelSpec spec;
  StudyDataset d = test_support::make_template_dataset();
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  const auto& lay = model.layout();
  Eigen::VectorXd truth = test_support::synthetic_truth(lay);

  SUBCASE("point-mass draws collapse all summaries") {
    auto draws = point_mass_draws(lay, truth);
    CurveSummary cs = curve_summary(model, draws, 0, CurveKind::ifr);
    for (int age = 0; age <= 100; age += 10) {
      CHECK(cs.mean[age] == doctest::Approx(cs.median[age]).epsilon(1e-12));
      CHECK(cs.lo95[age] == doctest::Approx(cs.hi95[age]).epsilon(1e-12));
      CHECK(cs.median[age] == doctest::Approx(model.ifr_at(truth, 0, age)).epsilon(1e-12));
    }
  }
  SUBCASE("zero spline coefficients flatten the curve in age") {
    Eigen::VectorXd flat = truth;
    flat[lay.idx_gamma(1, 0)] = 0.0;
    flat[lay.idx_gamma(1, 1)] = 0.0;
    auto draws = point_mass_draws(lay, flat);
    CurveSummary cs = curve_summary(model, draws, 1, CurveKind::sero);
    for (int age = 0; age <= 100; ++age)
      CHECK(cs.median[age] == doctest::Approx(cs.median[0]).epsilon(1e-12));
  }
  SUBCASE("pointwise quantiles match a sort oracle") {
    std::vector<Eigen::MatrixXd> chains;
    Eigen::MatrixXd m(400, lay.dim());
    Rng rng(17);
    for (int i = 0; i < 400; ++i) {
      Eigen::VectorXd c = truth;
      c[lay.idx_beta_loc(0, 0)] += 0.3 * rng.normal();
      m.row(i) = c.transpose();
    }
    chains.push_back(m);
    auto draws = posterior_draws_from_constrained(lay, std::move(chains));
    CurveSummary cs = curve_summary(model, draws, 0, CurveKind::ifr);

    std::vector<double> at60;
    for (int i = 0; i < 400; ++i)
      at60.push_back(model.ifr_at(draws.constrained[0].row(i).transpose(), 0, 60.0));
    std::sort(at60.begin(), at60.end());
    auto oracle = [&](double p) {
      double h = p * (at60.size() - 1);
      std::size_t k = static_cast<std::size_t>(h);
      return at60[k] + (h - k) * (at60[std::min(k + 1, at60.size() - 1)] - at60[k]);
    };
    CHECK(cs.median[60] == doctest::Approx(oracle(0.5)).epsilon(1e-12));
    CHECK(cs.lo95[60] == doctest::Approx(oracle(0.025)).epsilon(1e-12));
    CHECK(cs.hi80[60] == doctest::Approx(oracle(0.90)).epsilon(1e-12));
  }
  SUBCASE("too few draws are rejected") {
    auto draws = point_mass_draws(lay, truth, 50);
    CHECK_THROWS_AS(curve_summary(model, draws, 0, CurveKind::sero), Error);
  }
}

TEST_CASE("ifr at age 60 with benchmark flags") {
  ModelSpec spec;
  StudyDataset d = test_support::make_template_dataset();
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  const auto& lay = model.layout();
  Eigen::VectorXd truth = test_support::synthetic_truth(lay);

  auto draws = point_mass_draws(lay, truth);
  double v = model.ifr_at(truth, 0, 60.0);
  IfrAtAge res = ifr_at_age(model, draws, 0, 60.0, std::nullopt);
  CHECK(res.q.median == doctest::Approx(v).epsilon(1e-12));
  CHECK(res.q.lo95 == doctest::Approx(res.q.hi95).epsilon(1e-12));
  CHECK(res.benchmark_flag == "NONE");

  CHECK(ifr_at_age(model, draws, 0, 60.0, v * 0.5).benchmark_flag == "ABOVE");
  CHECK(ifr_at_age(model, draws, 0, 60.0, v * 2.0).benchmark_flag == "BELOW");
}

TEST_CASE("population ifr") {
  StudyDataset d = test_support::make_template_dataset();
  auto dens = test_support::densities_for(d);

  SUBCASE("constant curves factor out for any density") {
    ModelSpec spec;
    spec.sero_spline = false;
    spec.ifr_spline = false;
    PreparedModel model(d, dens, spec);
    const auto& lay = model.layout();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.dim());
    for (int i = 0; i <= lay.ifr_dim(); ++i) c[lay.idx_sigma(i)] = 1.0;
    c[lay.idx_sigma_country()] = 1.0;
    c[lay.idx_gamma0(0)] = 0.4;
    c[lay.idx_beta_loc(0, 0)] = std::log(0.007);
    auto draws = point_mass_draws(lay, c);
    for (const AgeDensity& f : {dens[0], uniform_density()}) {
      PopulationIfrSummary s = population_ifr(model, draws, 0, f);
      CHECK(s.median == doctest::Approx(0.007).epsilon(1e-9));
    }
  }
  SUBCASE("infection weighting reduces to the f-weighted mean under constant pi") {
    ModelSpec full;
    PreparedModel m2(d, dens, full);
    const auto& lay2 = m2.layout();
    Eigen::VectorXd c = test_support::synthetic_truth(lay2);
    c[lay2.idx_gamma(0, 0)] = 0.0;
    c[lay2.idx_gamma(0, 1)] = 0.0;
    c[lay2.idx_gamma0(0)] = logit(0.3);
    auto draws = point_mass_draws(lay2, c);
    AgeDensity f = uniform_density();
    PopulationIfrSummary s = population_ifr(m2, draws, 0, f);
    double expected =
        bin_average([&](double a) { return m2.ifr_at(c, 0, a); }, f, AgeBin::range(0, 100), m2.mesh());
    CHECK(s.median == doctest::Approx(expected).epsilon(1e-9));
    PopulationIfrSummary pw = population_ifr(m2, draws, 0, f, PopIfrMode::population_weighted);
    CHECK(pw.median == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("age structure shifts the population ifr for a rising curve") {
    ModelSpec full;
    PreparedModel m2(d, dens, full);
    Eigen::VectorXd c = test_support::synthetic_truth(m2.layout());
    auto draws = point_mass_draws(m2.layout(), c);
    AgeDensity young = uniform_density(), old = uniform_density();
    for (int a = 0; a <= 100; ++a) {
      young.grid_values[a] = 101.0 - a;
      old.grid_values[a] = 1.0 + a;
    }
    for (AgeDensity* f : {&young, &old}) {
      double s = f->grid_integral();
      for (double& v : f->grid_values) v /= s;
    }
    double ifr_young = population_ifr(m2, draws, 0, young).median;
    double ifr_old = population_ifr(m2, draws, 0, old).median;
    CHECK(ifr_old > 1.5 * ifr_young);
  }
  SUBCASE("scale of the density cancels") {
    ModelSpec full;
    PreparedModel m2(d, dens, full);
    Eigen::VectorXd c = test_support::synthetic_truth(m2.layout());
    auto draws = point_mass_draws(m2.layout(), c);
    AgeDensity scaled = dens[0];
    for (double& v : scaled.grid_values) v *= 7.5;
    CHECK(population_ifr(m2, draws, 0, dens[0]).median ==
          doctest::Approx(population_ifr(m2, draws, 0, scaled).median).epsilon(1e-12));
  }
}

TEST_CASE("standardized density") {
  auto d = test_support::make_template_dataset();
  auto dens = test_support::densities_for(d);

  SUBCASE("identical inputs are returned unchanged") {
    std::vector<AgeDensity> same{dens[0], dens[0], dens[0]};
    AgeDensity out = standardized_density(same);
    for (int a = 0; a <= 100; ++a)
      CHECK(out.grid_values[a] == doctest::Approx(dens[0].grid_values[a]).epsilon(1e-9));
  }
  SUBCASE("the median ignores a single outlier") {
    AgeDensity outlier = dens[0];
    for (int a = 0; a <= 100; ++a) outlier.grid_values[a] = a < 50 ? 0.02 : 0.0;
    std::vector<AgeDensity> mix{dens[0], dens[0], outlier};
    AgeDensity out = standardized_density(mix);
    for (int a = 0; a <= 100; a += 5)
      CHECK(out.grid_values[a] == doctest::Approx(dens[0].grid_values[a]).epsilon(1e-9));
  }
  SUBCASE("output integrates to one") {
    AgeDensity out = standardized_density(dens);
    CHECK(out.grid_integral() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("rogan-gladen estimator") {
  SUBCASE("perfect test returns the raw positivity") {
    SerologyBinObs obs{bin(20, 29), 200, 57};
    RoganGladenEstimate rg = rogan_gladen(obs, 1.0, 1.0);
    CHECK(rg.estimate == doctest::Approx(57.0 / 200.0).epsilon(1e-12));
  }
  SUBCASE("documented arithmetic example") {
    SerologyBinObs obs{bin(9, 20), 220, 59};
    RoganGladenEstimate rg = rogan_gladen(obs, 0.795, 1.0);
    CHECK(rg.estimate == doctest::Approx(0.3373).epsilon(1e-3));
    CHECK(rg.lo95 < rg.estimate);
    CHECK(rg.hi95 > rg.estimate);
  }
  SUBCASE("raw positivity below the false-positive floor clamps to zero") {
    SerologyBinObs obs{bin(0, 9), 100, 2};
    RoganGladenEstimate rg = rogan_gladen(obs, 0.9, 0.95);
    CHECK(rg.estimate == 0.0);
  }
  SUBCASE("degenerate assay is rejected") {
    SerologyBinObs obs{bin(0, 9), 100, 50};
    try {
      rogan_gladen(obs, 0.5, 0.5);
      FAIL("expected DegenerateTest");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_test);
    }
  }
  SUBCASE("exactly inverts positivity when no clamping occurs") {
    Rng rng(31415);
    int checked = 0;
    while (checked < 1000) {
      double pi = rng.uniform01();
      double sens = rng.uniform(0.5, 1.0), spec = rng.uniform(0.5, 1.0);
      if (sens + spec <= 1.05) continue;
      double p = positivity(pi, sens, spec);
      double back = (p + spec - 1.0) / (sens + spec - 1.0);
      CHECK(std::abs(back - pi) < 1e-12);
      ++checked;
    }
  }
}

TEST_CASE("naive ifr") {
  CHECK(naive_ifr({bin(60, 69), 0}, 1e4, 0.5) == 0.0);
  CHECK(naive_ifr({bin(60, 69), 71}, 1e4, 0.5) == doctest::Approx(0.0142).epsilon(1e-12));
  try {
    naive_ifr({bin(60, 69), 3}, 1e4, 0.0);
    FAIL("expected ZeroPrevalence");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::zero_prevalence);
  }
}

TEST_CASE("curve summaries are stable under draw subsetting") {
  SmallFit fit = make_small_fit(404);
  CurveSummary full = curve_summary(fit.model, fit.draws, 0, CurveKind::sero);

  std::vector<Eigen::MatrixXd> half{fit.draws.constrained[0]};
  auto half_draws = posterior_draws_from_constrained(fit.draws.layout, std::move(half));
  CurveSummary part = curve_summary(fit.model, half_draws, 0, CurveKind::sero);
  int inside = 0;
  for (int age = 0; age <= 100; ++age)
    if (part.median[age] >= full.lo95[age] && part.median[age] <= full.hi95[age]) ++inside;
  CHECK(inside >= 100);  // at least 99% of ages
}
