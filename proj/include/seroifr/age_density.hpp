#pragma once

#include <vector>

#include "seroifr/age_bin.hpp"
#include "seroifr/dataset.hpp"
#include "seroifr/quadrature.hpp"
#include "seroifr/step_density.hpp"

namespace seroifr {

/// Continuous population age density on [0, 100]: values at integer ages with
/// piecewise-linear interpolation, normalized so the trapezoidal integral
/// over [0, 100] is 1.
struct AgeDensity {
  std::vector<double> grid_values;  // size 101, ages 0..100

  double operator()(double age) const;
  double grid_integral() const;  // trapezoid over the integer grid
  void validate() const;
};

/// Smooth a step density into a continuous one: sample the step at integer
/// ages 0..85, append an anchor point (100, 0), fit a locally weighted linear
/// regression, predict at integer ages 0..100, shift up if any prediction is
/// negative, and renormalize to unit integral.
AgeDensity smooth_to_density(const StepDensity& step, double loess_span = 0.75);

double bin_mass(const AgeDensity& f, const AgeBin& bin, const QuadratureMesh& mesh = {});

/// Expected population count in the bin (real-valued, not rounded).
double population_in_bin(const LocationRecord& loc, const AgeDensity& f, const AgeBin& bin,
                         const QuadratureMesh& mesh = {});

/// Full pipeline for one location: expand population bins, refine against the
/// national distribution when any local bin is wider than five years, smooth.
AgeDensity build_density(const LocationRecord& loc, const std::vector<PopulationBin>& national_bins,
                         double loess_span = 0.75);

}  // namespace seroifr
