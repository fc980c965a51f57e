#pragma once

#include <utility>
#include <vector>

#include "seroifr/age_bin.hpp"

namespace seroifr {

/// Piecewise-constant age density. Pieces are half-open [edges[i], edges[i+1])
/// with per-year density heights; total mass must be 1.
struct StepDensity {
  std::vector<double> edges;    // ascending, size = heights.size() + 1
  std::vector<double> heights;  // per-year proportion, >= 0

  double value(double age) const;  // 0 outside all pieces
  double total_mass() const;
  void validate() const;  // heights >= 0 and mass within 1e-9 of 1
};

/// Spread each bin's proportion uniformly over the bin: height = p / width.
StepDensity expand_step(const std::vector<std::pair<AgeBin, double>>& bins);

/// Reshape wide local bins by the national step: within a local bin wider
/// than five years the output follows the national shape, rescaled so the
/// values at the integer ages inside the bin sum to the local proportion.
/// Bins of width five or less pass through as flat pieces.
StepDensity refine_with_national(const std::vector<std::pair<AgeBin, double>>& local_bins,
                                 const StepDensity& national_step);

}  // namespace seroifr
