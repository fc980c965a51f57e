#include "seroifr/quadrature.hpp"

#include <cmath>

#include "seroifr/common.hpp"

namespace seroifr {

QuadratureMesh::BinNodes QuadratureMesh::nodes(const AgeBin& bin) const {
  if (!(bin.width() > 0)) fail(Errc::empty_bin, "bin " + bin.describe() + " has zero width");
  if (!(step > 0)) fail(Errc::bad_config, "mesh step must be positive");

  BinNodes out;
  out.ages.push_back(bin.lo);
  // interior nodes at absolute-age multiples of step, endpoints always exact
  for (long k = static_cast<long>(std::floor(bin.lo / step)) + 1;; ++k) {
    double a = static_cast<double>(k) * step;
    if (!(a < bin.hi)) break;
    if (a > bin.lo) out.ages.push_back(a);
  }
  out.ages.push_back(bin.hi);

  std::size_t m = out.ages.size();
  out.weights.assign(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double h = 0.5 * (out.ages[i + 1] - out.ages[i]);
    out.weights[i] += h;
    out.weights[i + 1] += h;
  }
  return out;
}

}  // namespace seroifr
