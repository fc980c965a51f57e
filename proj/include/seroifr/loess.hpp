#pragma once

#include <vector>

namespace seroifr {

/// Locally weighted linear regression (degree 1, tricube kernel). For each
/// query point the `span` fraction of nearest sample points forms the
/// neighbourhood; the bandwidth is the distance to the farthest neighbour.
class Loess {
 public:
  Loess(std::vector<double> x, std::vector<double> y, double span);

  double predict(double x0) const;

 private:
  std::vector<double> x_, y_;  // sorted by x
  std::size_t q_;              // neighbourhood size
};

}  // namespace seroifr
