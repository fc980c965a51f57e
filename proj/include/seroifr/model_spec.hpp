#pragma once

#include <map>
#include <string>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "seroifr/spline.hpp"

namespace seroifr {

struct PriorSpec {
  double gamma0_mean = -1.0;
  double gamma0_sd = 1.5;
  double gamma_sd = 0.05;        // serology spline coefficients
  double beta_global_mean = 0.0;
  double beta_global_sd = 5.0;
  double sigma_scale = 2.0;      // half-normal scale for all sigma blocks
  double sens_a = 10.0, sens_b = 1.0;
  double spec_a = 50.0, spec_b = 1.0;
};

enum class PopIfrMode { infection_weighted, population_weighted };

struct ModelSpec {
  NaturalSplineDef sero_knots{10.0, 80.0, {60.0}};
  NaturalSplineDef ifr_knots{0.0, 80.0, {10.0, 60.0}};
  PriorSpec priors;
  double mesh_step = 0.25;
  bool non_centered = true;
  double loess_span = 0.75;
  PopIfrMode pop_ifr_mode = PopIfrMode::infection_weighted;

  // analysis/testing knobs
  bool sero_spline = true;   // false: seroprevalence is intercept-only (flat in age)
  bool ifr_spline = true;    // false: IFR is intercept-only
  bool flat_priors = false;  // likelihood only, no priors or transform jacobians
  std::map<std::string, std::pair<double, double>> fixed_tests;  // test_id -> (sens, spec) held constant

  void validate() const;
  static ModelSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

}  // namespace seroifr
