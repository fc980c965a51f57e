#include "seroifr/loess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seroifr/common.hpp"

namespace seroifr {

namespace {

double tricube(double u) {
  if (u >= 1.0) return 0.0;
  double t = 1.0 - u * u * u;
  return t * t * t;
}

}  // namespace

Loess::Loess(std::vector<double> x, std::vector<double> y, double span) {
  if (x.size() != y.size() || x.size() < 2) fail(Errc::degenerate_fit, "loess needs matched x/y with >= 2 points");
  if (!(span > 0.0)) fail(Errc::bad_config, "loess span must be positive");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  x_.reserve(x.size());
  y_.reserve(y.size());
  for (std::size_t i : order) {
    x_.push_back(x[i]);
    y_.push_back(y[i]);
  }
  std::size_t n = x_.size();
  q_ = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(span * static_cast<double>(n))), 2, n);
}

double Loess::predict(double x0) const {
  std::size_t n = x_.size();
  // nearest-q window in sorted x: grow [lo, hi) around x0
  std::size_t hi = static_cast<std::size_t>(std::lower_bound(x_.begin(), x_.end(), x0) - x_.begin());
  std::size_t lo = hi;
  while (hi - lo < q_) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n) {
      --lo;
    } else if (x0 - x_[lo - 1] <= x_[hi] - x0) {
      --lo;
    } else {
      ++hi;
    }
  }
  double h = std::max(x0 - x_[lo], x_[hi - 1] - x0);
  if (h <= 0.0) return y_[lo];  // all neighbours coincide with x0

  // weighted least squares line through the window
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    double w = tricube(std::abs(x_[i] - x0) / h);
    if (w <= 0.0) continue;
    double dx = x_[i] - x0;  // center on the query point
    sw += w;
    swx += w * dx;
    swy += w * y_[i];
    swxx += w * dx * dx;
    swxy += w * dx * y_[i];
  }
  if (sw <= 0.0) fail(Errc::degenerate_fit, "loess window has no positive weights");
  double det = sw * swxx - swx * swx;
  if (det <= 1e-12 * sw * swxx || swxx == 0.0) return swy / sw;  // collapse to weighted mean
  // prediction at dx = 0 is the intercept
  return (swxx * swy - swx * swxy) / det;
}

}  // namespace seroifr
