#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seroifr/distributions.hpp"
#include "seroifr/model.hpp"
#include "seroifr/rng.hpp"
#include "seroifr/spline.hpp"
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

// single location, one test; serology/death bins configurable
StudyDataset tiny_dataset(std::vector<SerologyBinObs> sero, std::vector<DeathBinObs> deaths,
                          TestValidation test = {"assay", 73, 58, 222, 222}) {
  StudyDataset d;
  d.tests.push_back(test);
  LocationRecord loc;
  loc.location_id = "only";
  loc.country_id = "ctry";
  loc.test_id = test.test_id;
  loc.serology = std::move(sero);
  loc.deaths = std::move(deaths);
  for (int k = 0; k < 10; ++k)
    loc.population_bins.push_back({k == 9 ? bin(90, std::nullopt) : bin(10 * k, 10 * k + 9), 1e5});
  loc.total_population = 1e6;
  d.locations.push_back(loc);
  d.national_populations["ctry"] = d.locations[0].population_bins;
  return d;
}

Eigen::VectorXd fd_gradient(const PreparedModel& model, const Eigen::VectorXd& u, double h = 1e-5) {
  Eigen::VectorXd g(u.size());
  for (int i = 0; i < u.size(); ++i) {
    Eigen::VectorXd up = u, um = u;
    up[i] += h;
    um[i] -= h;
    g[i] = (model.log_posterior(up).value - model.log_posterior(um).value) / (2 * h);
  }
  return g;
}

double max_rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({1.0, std::abs(a[i]), std::abs(b[i])}));
  return worst;
}

}  // namespace

TEST_CASE("positivity composes seroprevalence with the test characteristics") {
  CHECK(positivity(0.0, 0.7, 1.0) == 0.0);
  CHECK(positivity(1.0, 0.83, 0.9) == doctest::Approx(0.83).epsilon(1e-15));
  CHECK(positivity(0.3, 0.9, 0.95) == doctest::Approx(0.305).epsilon(1e-12));
}

TEST_CASE("prevalence and ifr curves") {
  ModelSpec spec;
  StudyDataset d = test_support::make_template_dataset();
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  const auto& lay = model.layout();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.dim());
  for (int i = 0; i <= lay.ifr_dim(); ++i) c[lay.idx_sigma(i)] = 1.0;
  c[lay.idx_sigma_country()] = 1.0;

  SUBCASE("zero coefficients give constant curves") {
    for (double age : {0.0, 17.0, 60.0, 100.0}) {
      CHECK(model.prevalence_at(c, 0, age) == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(model.ifr_at(c, 0, age) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("intercept-only curves hit the documented anchors") {
    c[lay.idx_gamma0(1)] = -1.0;
    c[lay.idx_beta_loc(1, 0)] = -6.4;
    for (double age : {5.0, 40.0, 90.0}) {
      CHECK(model.prevalence_at(c, 1, age) == doctest::Approx(0.26894142136992605).epsilon(1e-10));
      CHECK(model.ifr_at(c, 1, age) == doctest::Approx(std::exp(-6.4)).epsilon(1e-12));
      CHECK(model.ifr_at(c, 1, age) == doctest::Approx(0.00166).epsilon(2e-3));
    }
  }
  SUBCASE("spline contributions match a scalar recomposition") {
    c[lay.idx_gamma0(0)] = -1.0;
    c[lay.idx_gamma(0, 0)] = 0.1;
    c[lay.idx_gamma(0, 1)] = -0.05;
    Eigen::VectorXd z = basis_eval(spec.sero_knots, 40.0);
    double expected = inv_logit(-1.0 + 0.1 * z[0] - 0.05 * z[1]);
    CHECK(model.prevalence_at(c, 0, 40.0) == doctest::Approx(expected).epsilon(1e-12));

    c[lay.idx_beta_loc(0, 0)] = -5.0;
    c[lay.idx_beta_loc(0, 1)] = 0.8;
    c[lay.idx_beta_loc(0, 2)] = -0.3;
    c[lay.idx_beta_loc(0, 3)] = 0.12;
    Eigen::VectorXd x = basis_eval(spec.ifr_knots, 60.0);
    double expected_ifr = std::exp(-5.0 + 0.8 * x[0] - 0.3 * x[1] + 0.12 * x[2]);
    CHECK(model.ifr_at(c, 0, 60.0) == doctest::Approx(expected_ifr).epsilon(1e-12));
  }
}

TEST_CASE("bin_average under the trapezoid mesh") {
  AgeDensity f = uniform_density();
  QuadratureMesh mesh;

  SUBCASE("constant integrand is exact") {
    CHECK(bin_average([](double) { return 3.7; }, f, AgeBin::range(13, 54), mesh) ==
          doctest::Approx(3.7).epsilon(1e-14));
  }
  SUBCASE("linear integrand under uniform weight is exact") {
    CHECK(bin_average([](double a) { return a; }, f, AgeBin::range(20, 30), mesh) ==
          doctest::Approx(25.0).epsilon(1e-11));
  }
  SUBCASE("quadratic integrand matches the closed-form trapezoid sum") {
    // frozen oracle: sum_k w_k a_k^2 / 10 on the 0.25 grid over [0,10]
    double num = 0.0;
    for (int k = 0; k <= 40; ++k) {
      double a = 0.25 * k;
      double w = (k == 0 || k == 40) ? 0.125 : 0.25;
      num += w * a * a;
    }
    double oracle = num / 10.0;  // = 33.34375
    CHECK(oracle == doctest::Approx(33.34375).epsilon(1e-15));
    double got = bin_average([](double a) { return a * a; }, f, AgeBin::range(0, 10), mesh);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(got - 100.0 / 3.0) < 0.011);

    QuadratureMesh fine{0.125};
    double got_fine = bin_average([](double a) { return a * a; }, f, AgeBin::range(0, 10), fine);
    CHECK(std::abs(got - 100.0 / 3.0) / std::abs(got_fine - 100.0 / 3.0) >= 3.5);
  }
}

TEST_CASE("parameter dimension bookkeeping") {
  ModelSpec spec;
  StudyDataset d = test_support::make_template_dataset();
  PreparedModel model(d, test_support::densities_for(d), spec);
  const auto& lay = model.layout();
  const int L = 3, C = 2, T = 2;
  CHECK(lay.dim() == 3 * L + 4 * L + 4 + C + 5 + 2 * T);
  CHECK(lay.names().size() == static_cast<std::size_t>(lay.dim()));
  CHECK(lay.group(lay.idx_sigma_country()) == "sigma");
  CHECK(lay.group(lay.idx_beta_loc(2, 3)) == "beta_loc");
  CHECK(lay.group(lay.idx_gamma(1, 1)) == "gamma");
}

TEST_CASE("transform round trip and invariance of the log posterior") {
  for (bool nc : {true, false}) {
    ModelSpec spec;
    spec.non_centered = nc;
    StudyDataset d = test_support::make_template_dataset();
    auto dens = test_support::densities_for(d);
    PreparedModel shell(d, dens, spec);
    StudyDataset sim = shell.simulate(test_support::synthetic_truth(shell.layout()), 11);
    PreparedModel model(sim, dens, spec);
    const auto& lay = model.layout();

    Rng rng(42);
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::VectorXd u(lay.dim());
      for (int i = 0; i < lay.dim(); ++i) u[i] = rng.uniform(-1.5, 1.5);
      Eigen::VectorXd back = lay.from_constrained(lay.to_constrained(u));
      CHECK((back - u).lpNorm<Eigen::Infinity>() < 1e-12);
      double lp1 = model.log_posterior(u).value;
      double lp2 = model.log_posterior(back).value;
      CHECK(lp1 == doctest::Approx(lp2).epsilon(1e-9));
    }
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (bool nc : {true, false}) {
    ModelSpec spec;
    spec.non_centered = nc;
    StudyDataset d = test_support::make_template_dataset(800, 8e5);
    auto dens = test_support::densities_for(d);
    PreparedModel shell(d, dens, spec);
    StudyDataset sim = shell.simulate(test_support::synthetic_truth(shell.layout()), 23);
    PreparedModel model(sim, dens, spec);
    const auto& lay = model.layout();
    Eigen::VectorXd center = lay.from_constrained(test_support::synthetic_truth(lay));

    Rng rng(nc ? 7 : 8);
    for (int rep = 0; rep < 5; ++rep) {
      Eigen::VectorXd u = center;
      for (int i = 0; i < u.size(); ++i) u[i] += rng.uniform(-0.5, 0.5);
      LogDensityResult r = model.log_posterior(u);
      REQUIRE(std::isfinite(r.value));
      CHECK(max_rel_err(r.gradient, fd_gradient(model, u)) < 1e-6);
    }
  }
}

TEST_CASE("gradient with fixed tests and disabled splines") {
  ModelSpec spec;
  spec.sero_spline = false;
  spec.ifr_spline = false;
  spec.fixed_tests["assay_2"] = {0.88, 0.995};
  StudyDataset d = test_support::make_template_dataset(500, 5e5);
  auto dens = test_support::densities_for(d);
  PreparedModel shell(d, dens, spec);
  StudyDataset sim = shell.simulate(test_support::synthetic_truth(shell.layout()), 31);
  PreparedModel model(sim, dens, spec);
  const auto& lay = model.layout();
  CHECK(lay.n_sampled_tests() == 1);
  Eigen::VectorXd center = lay.from_constrained(test_support::synthetic_truth(lay));

  Rng rng(99);
  for (int rep = 0; rep < 4; ++rep) {
    Eigen::VectorXd u = center;
    for (int i = 0; i < u.size(); ++i) u[i] += rng.uniform(-0.5, 0.5);
    LogDensityResult r = model.log_posterior(u);
    REQUIRE(std::isfinite(r.value));
    CHECK(max_rel_err(r.gradient, fd_gradient(model, u)) < 1e-6);
  }
}

TEST_CASE("serology likelihood term reduces to the closed-form binomial") {
  ModelSpec spec;
  spec.flat_priors = true;
  spec.sero_spline = false;
  spec.ifr_spline = false;
  spec.fixed_tests["assay"] = {1.0, 1.0};
  StudyDataset d = tiny_dataset({{bin(20, 39), 10, 3}}, {});
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  REQUIRE(model.layout().dim() == 1);  // gamma0 only: no deaths, test fixed

  for (double g0 : {-1.3, -0.2, 0.9}) {
    Eigen::VectorXd u(1);
    u[0] = g0;
    double pi = inv_logit(g0);
    double expected = binomial_log_coeff(10, 3) + 3 * std::log(pi) + 7 * std::log1p(-pi);
    CHECK(model.log_posterior(u).value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("a zero-death bin contributes exactly -N*Lambda") {
  ModelSpec spec;
  spec.flat_priors = true;
  spec.sero_spline = false;
  spec.ifr_spline = false;
  spec.fixed_tests["assay"] = {1.0, 1.0};
  StudyDataset d = tiny_dataset({}, {{bin(60, 79), 0}});
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  const auto& lay = model.layout();

  // non-centered reconstruction: beta0 = global + country + sigma*eta; set global only
  Eigen::VectorXd u = Eigen::VectorXd::Zero(lay.dim());
  u[lay.idx_gamma0(0)] = -0.7;
  u[lay.idx_beta_global(0)] = -5.2;

  const AgeBin& b = d.locations[0].deaths[0].bin;
  double pi = inv_logit(-0.7);
  double lambda_rate = bin_average([&](double) { return pi * std::exp(-5.2); }, dens[0], b, model.mesh());
  double n_pop = population_in_bin(d.locations[0], dens[0], b, model.mesh());
  CHECK(model.log_posterior(u).value == doctest::Approx(-n_pop * lambda_rate).epsilon(1e-12));
}

TEST_CASE("likelihood factorizes into serology and death submodels") {
  ModelSpec spec;
  StudyDataset full = test_support::make_template_dataset(600, 6e5);
  auto dens = test_support::densities_for(full);
  PreparedModel shell(full, dens, spec);
  StudyDataset sim = shell.simulate(test_support::synthetic_truth(shell.layout()), 77);

  StudyDataset sero_only = sim, death_only = sim, none = sim;
  for (auto& loc : sero_only.locations) loc.deaths.clear();
  for (auto& loc : death_only.locations) loc.serology.clear();
  for (auto& loc : none.locations) {
    loc.deaths.clear();
    loc.serology.clear();
  }
  // keep the IFR block alive in every variant so dimensions agree
  death_only.locations[0].deaths = sim.locations[0].deaths;
  sero_only.locations[0].deaths = {sim.locations[0].deaths[0]};
  sero_only.locations[0].deaths[0].deaths = 0;
  none.locations[0].deaths = sero_only.locations[0].deaths;

  PreparedModel m_full(sim, dens, spec);
  PreparedModel m_sero(sero_only, dens, spec);
  PreparedModel m_death(death_only, dens, spec);
  PreparedModel m_none(none, dens, spec);

  Rng rng(5);
  Eigen::VectorXd u(m_full.layout().dim());
  for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-0.8, 0.8);

  double lp_full = m_full.log_posterior(u).value + m_none.log_posterior(u).value;
  double lp_split = m_sero.log_posterior(u).value + m_death.log_posterior(u).value;
  CHECK(lp_full == doctest::Approx(lp_split).epsilon(1e-10));
}

TEST_CASE("raising gamma0 strictly raises every bin positivity when sens+spec>1") {
  ModelSpec spec;
  StudyDataset d = test_support::make_template_dataset();
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  const auto& lay = model.layout();
  Eigen::VectorXd c = lay.to_constrained(Eigen::VectorXd::Zero(lay.dim()));
  c[lay.idx_sens(0)] = 0.9;
  c[lay.idx_spec(0)] = 0.97;

  for (const auto& obs : d.locations[0].serology) {
    auto pbar = [&](double g0) {
      Eigen::VectorXd cc = c;
      cc[lay.idx_gamma0(0)] = g0;
      double pibar = bin_average([&](double a) { return model.prevalence_at(cc, 0, a); }, dens[0],
                                 obs.bin, model.mesh());
      return positivity(pibar, 0.9, 0.97);
    };
    CHECK(pbar(-0.5) < pbar(0.0));
    CHECK(pbar(0.0) < pbar(0.6));
  }
}

TEST_CASE("prior tail probabilities and density formulas") {
  // Beta(50,1): P(X > 0.95) = 1 - 0.95^50; Beta(10,1): P(X > 0.79) = 1 - 0.79^10
  CHECK(1.0 - std::pow(0.95, 50) == doctest::Approx(0.9231).epsilon(2e-4));
  CHECK(1.0 - std::pow(0.79, 10) == doctest::Approx(0.9053).epsilon(2e-4));
  CHECK(1.0 - std::pow(0.95, 50) > 0.9);
  CHECK(1.0 - std::pow(0.79, 10) > 0.9);

  // numeric integral of exp(beta_lpdf) over the tail reproduces the closed form
  for (auto [a, b, q] : {std::tuple{50.0, 1.0, 0.95}, std::tuple{10.0, 1.0, 0.79}}) {
    const int steps = 200000;
    double h = (1.0 - q) / steps, integral = 0.0;
    for (int i = 0; i <= steps; ++i) {
      double x = q + i * h;
      double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      if (x >= 1.0) x = 1.0 - 1e-12;
      integral += w * h * std::exp(beta_lpdf(x, a, b));
    }
    CHECK(integral == doctest::Approx(1.0 - std::pow(q, a)).epsilon(1e-6));
  }

  CHECK(normal_lpdf(1.3, -1.0, 1.5) ==
        doctest::Approx(-0.5 * std::pow(2.3 / 1.5, 2) - std::log(1.5) - 0.5 * std::log(2 * M_PI))
            .epsilon(1e-12));
  CHECK(half_normal_lpdf(0.7, 2.0) ==
        doctest::Approx(std::log(2.0) - std::log(2.0) - 0.5 * std::log(2 * M_PI) - 0.49 / 8.0)
            .epsilon(1e-12));
  CHECK(beta_lpdf(0.9, 10, 1) == doctest::Approx(std::log(10.0) + 9 * std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("forward simulation") {
  ModelSpec spec;
  spec.fixed_tests["assay_1"] = {1.0, 1.0};
  spec.fixed_tests["assay_2"] = {1.0, 1.0};
  StudyDataset d = test_support::make_template_dataset(400, 4e5);
  auto dens = test_support::densities_for(d);
  PreparedModel model(d, dens, spec);
  const auto& lay = model.layout();

  SUBCASE("saturated prevalence fills every bin") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.dim());
    for (int l = 0; l < 3; ++l) c[lay.idx_gamma0(l)] = 30.0;
    for (int i = 0; i <= lay.ifr_dim(); ++i) c[lay.idx_sigma(i)] = 1.0;
    c[lay.idx_sigma_country()] = 1.0;
    for (int l = 0; l < 3; ++l) c[lay.idx_beta_loc(l, 0)] = -30.0;
    StudyDataset sim = model.simulate(c, 123);
    for (const auto& loc : sim.locations) {
      for (const auto& s : loc.serology) CHECK(s.n_positive == s.n_tested);
      for (const auto& dd : loc.deaths) CHECK(dd.deaths == 0);  // ifr ~ exp(-30)
    }
  }
  SUBCASE("determinism and law of large numbers") {
    StudyDataset big = test_support::make_template_dataset(1000000, 1e6);
    auto dens_big = test_support::densities_for(big);
    ModelSpec plain;
    PreparedModel m2(big, dens_big, plain);
    Eigen::VectorXd truth = test_support::synthetic_truth(m2.layout());
    StudyDataset s1 = m2.simulate(truth, 555);
    StudyDataset s2 = m2.simulate(truth, 555);
    CHECK(s1 == s2);

    for (int l = 0; l < 3; ++l) {
      auto [sens, spec_v] = m2.test_characteristics(truth, l);
      for (const auto& obs : s1.locations[l].serology) {
        double pibar = bin_average([&](double a) { return m2.prevalence_at(truth, l, a); },
                                   dens_big[l], obs.bin, m2.mesh());
        double p = positivity(pibar, sens, spec_v);
        double se = std::sqrt(p * (1 - p) / 1e6);
        CHECK(std::abs(static_cast<double>(obs.n_positive) / 1e6 - p) <= 3 * se + 1e-9);
      }
    }
  }
}
