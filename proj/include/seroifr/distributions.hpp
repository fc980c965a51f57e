#pragma once

#include <cmath>

namespace seroifr {

inline double inv_logit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// log(inv_logit(x)), stable for large |x|
inline double log_inv_logit(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Normalized log-densities. Second parameters are standard deviations /
/// scales, never variances.
inline double normal_lpdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.91893853320467274178;  // 0.5*log(2*pi)
}

inline double half_normal_lpdf(double x, double scale) {
  double z = x / scale;
  // log 2 - log(scale) - 0.5*log(2*pi) - z^2/2
  return 0.69314718055994530942 - std::log(scale) - 0.91893853320467274178 - 0.5 * z * z;
}

inline double beta_lpdf(double x, double a, double b) {
  double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta;
}

inline double binomial_log_coeff(long n, long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

inline double binomial_lpmf(long k, long n, double p) {
  return binomial_log_coeff(n, k) + static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

inline double poisson_lpmf(long k, double mu) {
  return -mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0);
}

}  // namespace seroifr
