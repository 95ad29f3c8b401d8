#ifndef EVLAB_NORMING_HPP
#define EVLAB_NORMING_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "evlab/error.hpp"

namespace evlab {

/// How the minimum threshold depends on its level y.
enum class Convention {
  general_linear,      ///< v_n(y) = c_n y + d_n
  gaussian_symmetric,  ///< v_n(y) = -c_n y - d_n
};

inline const char* to_string(Convention c) {
  return c == Convention::general_linear ? "general-linear" : "gaussian-symmetric";
}

/// Linear norming constants for the maximum (a_n, b_n) and minimum (c_n, d_n).
struct NormingConstants {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;
  std::size_t n = 0;
  Convention convention = Convention::general_linear;

  void validate() const {
    if (!(a > 0.0) || !std::isfinite(a)) throw InputError("norming: a_n must be positive and finite");
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("norming: c_n must be positive and finite");
    if (!std::isfinite(b) || !std::isfinite(d)) throw InputError("norming: b_n and d_n must be finite");
    if (convention == Convention::gaussian_symmetric && (a != c || b != d))
      throw InputError("norming: gaussian-symmetric constants require a_n = c_n and b_n = d_n");
  }

  friend bool operator==(const NormingConstants&, const NormingConstants&) = default;
};

/// Standard Gaussian constants:
///   a_n = c_n = 1/sqrt(2 ln n),
///   b_n = d_n = sqrt(2 ln n) - (ln ln n + ln 4 pi) / (2 sqrt(2 ln n)).
/// Requires n >= 3 so that ln ln n > 0.
inline NormingConstants gaussian_norming(std::size_t n) {
  if (n < 3) throw InputError("gaussian_norming: n must be at least 3, got " + std::to_string(n));
  const double two_log = 2.0 * std::log(static_cast<double>(n));
  const double root = std::sqrt(two_log);
  const double scale = 1.0 / root;
  const double location =
      root - (std::log(std::log(static_cast<double>(n))) + std::log(4.0 * std::numbers::pi)) / (2.0 * root);
  return NormingConstants{scale, location, scale, location, n, Convention::gaussian_symmetric};
}

/// u_n(x) = a_n x + b_n; +-inf levels map to +-inf thresholds.
inline double u_threshold(const NormingConstants& nc, double x) noexcept { return nc.a * x + nc.b; }

/// v_n(y) per the constants' convention.
inline double v_threshold(const NormingConstants& nc, double y) noexcept {
  return nc.convention == Convention::general_linear ? nc.c * y + nc.d : -nc.c * y - nc.d;
}

inline double normalize_max(const NormingConstants& nc, double value) noexcept { return (value - nc.b) / nc.a; }

/// Normalized minimum. Under the Gaussian convention this is -(m + d_n)/c_n,
/// whose law tends to exp(-exp(-y)).
inline double normalize_min(const NormingConstants& nc, double value) noexcept {
  return nc.convention == Convention::general_linear ? (value - nc.d) / nc.c : -(value + nc.d) / nc.c;
}

}  // namespace evlab

#endif  // EVLAB_NORMING_HPP
