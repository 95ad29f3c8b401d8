#ifndef EVLAB_NORMAL_HPP
#define EVLAB_NORMAL_HPP

#include <cmath>
#include <numbers>

namespace evlab {

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x), accurate far into the right tail.
inline double normal_sf(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// P(lo < Z <= hi) for standard normal Z, avoiding cancellation in either tail.
/// Returns 0 when hi <= lo.
inline double normal_interval(double lo, double hi) noexcept {
  if (!(lo < hi)) return 0.0;
  if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return 1.0 - normal_cdf(lo) - normal_sf(hi);
}

}  // namespace evlab

#endif  // EVLAB_NORMAL_HPP
