#pragma once

#include <cstdint>
#include <random>

namespace seroifr {

/// Deterministic random source. All variate algorithms are implemented here
/// (not delegated to std distributions) so draw sequences are stable across
/// standard-library versions for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// splitmix64 mix of (master, stream), for deriving independent per-chain seeds
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

  double uniform01();                     // (0, 1)
  double uniform(double lo, double hi);
  double normal();                        // Box-Muller, cached pair
  long binomial(long n, double p);
  long poisson(double mu);
  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace seroifr
