#pragma once

#include <vector>

#include "seroifr/age_bin.hpp"

namespace seroifr {

/// Trapezoidal quadrature mesh over age bins: nodes are the bin endpoints
/// plus every interior multiple of `step`. Weights are the composite
/// trapezoid weights, so sum(w_i * g(a_i)) approximates the integral of g
/// over the bin.
struct QuadratureMesh {
  double step = 0.25;

  struct BinNodes {
    std::vector<double> ages;
    std::vector<double> weights;
  };

  BinNodes nodes(const AgeBin& bin) const;
};

}  // namespace seroifr
