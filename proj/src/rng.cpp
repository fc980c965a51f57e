#include "seroifr/rng.hpp"

#include <cmath>

#include "seroifr/common.hpp"

namespace seroifr {

std::uint64_t Rng::derive(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  // 53-bit mantissa, shifted into (0, 1)
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  double u1 = uniform01(), u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  cached_ = r * std::sin(a);
  have_cached_ = true;
  return r * std::cos(a);
}

long Rng::binomial(long n, double p) {
  if (n < 0) fail(Errc::count_violation, "binomial n must be >= 0");
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);
  // waiting-time (geometric skip) method; expected work O(n*p)
  long count = 0;
  double log_q = std::log1p(-p);
  double skipped = 0.0;
  while (true) {
    skipped += std::floor(std::log(uniform01()) / log_q) + 1.0;
    if (skipped > static_cast<double>(n)) return count;
    ++count;
  }
}

long Rng::poisson(double mu) {
  if (!(mu >= 0.0)) fail(Errc::count_violation, "poisson mean must be >= 0");
  if (mu == 0.0) return 0;
  // count exponential arrivals up to mu; O(mu) but exact
  long count = -1;
  double total = 0.0;
  while (total <= mu) {
    total += -std::log(uniform01());
    ++count;
  }
  return count;
}

}  // namespace seroifr
