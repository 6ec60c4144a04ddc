#ifndef IRMKIT_SPECIAL_HPP
#define IRMKIT_SPECIAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace irmkit {

// Reentrant log|Gamma(x)|; std::lgamma writes the global signgam on glibc.
inline double log_gamma(double x) noexcept {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline double log_beta(double a, double b) noexcept {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

// log(sum_i exp(v_i)); -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> v) noexcept {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double hi = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

}  // namespace irmkit

#endif  // IRMKIT_SPECIAL_HPP
