#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seroifr/age_density.hpp"
#include "seroifr/dataset.hpp"
#include "seroifr/draws.hpp"
#include "seroifr/model.hpp"

namespace seroifr {

enum class CurveKind { sero, ifr };

/// Pointwise posterior summaries of a fitted curve on the integer age grid.
struct CurveSummary {
  std::string location_id;
  CurveKind kind = CurveKind::sero;
  std::vector<double> mean, median, lo95, hi95, lo80, hi80;  // indexed by age 0..100
};

struct QuantileSummary {
  double mean = 0, median = 0, lo95 = 0, hi95 = 0, lo80 = 0, hi80 = 0;
};

struct PopulationIfrSummary {
  std::string location_id;
  std::string mode;  // OWN_DISTRIBUTION or STANDARDIZED
  double mean = 0, median = 0, lo95 = 0, hi95 = 0;
};

struct RoganGladenEstimate {
  double estimate = 0, lo95 = 0, hi95 = 0;
};

/// Linear-interpolation sample quantile of unsorted data (copies, sorts).
double quantile(std::vector<double> values, double p);

CurveSummary curve_summary(const PreparedModel& model, const PosteriorDraws& draws, int loc,
                           CurveKind kind);

/// Posterior of ifr(age) at one location plus a flag against an optional
/// benchmark: ABOVE/BELOW when the 95% interval clears it, OVERLAPS
/// otherwise, NONE without a benchmark.
struct IfrAtAge {
  QuantileSummary q;
  std::string benchmark_flag = "NONE";
};
IfrAtAge ifr_at_age(const PreparedModel& model, const PosteriorDraws& draws, int loc, double age = 60.0,
                    std::optional<double> benchmark = std::nullopt);

/// Expected deaths over expected infections under the age density f
/// (infection-weighted); the population-weighted variant integrates the IFR
/// curve against f directly.
PopulationIfrSummary population_ifr(const PreparedModel& model, const PosteriorDraws& draws, int loc,
                                    const AgeDensity& f, PopIfrMode mode = PopIfrMode::infection_weighted);

/// Pointwise median of the location densities at each integer age,
/// renormalized to unit integral.
AgeDensity standardized_density(const std::vector<AgeDensity>& densities);

/// Misclassification inversion of a raw positivity (clamped to [0,1]).
double rogan_gladen_point(double raw_positivity, double sens, double spec);

/// Misclassification-inverted prevalence with a Wald interval mapped through
/// the same affine transform (test characteristics treated as known).
RoganGladenEstimate rogan_gladen(const SerologyBinObs& obs, double sens, double spec);

double naive_ifr(const DeathBinObs& death_bin, double population, double rg_prevalence);

}  // namespace seroifr
