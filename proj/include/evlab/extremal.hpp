#ifndef EVLAB_EXTREMAL_HPP
#define EVLAB_EXTREMAL_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>

#include "evlab/error.hpp"
#include "evlab/genpath.hpp"
#include "evlab/missing.hpp"
#include "evlab/norming.hpp"

namespace evlab {

/// Support endpoints of the marginal law; used as sentinels for empty
/// observed samples. Gaussian by default.
struct Support {
  double lower = -std::numeric_limits<double>::infinity();  ///< inf{x : F(x) > 0}
  double upper = std::numeric_limits<double>::infinity();   ///< sup{x : F(x) < 1}
};

struct NormalizedQuadruple {
  double max_eps = 0.0;
  double min_eps = 0.0;
  double max = 0.0;
  double min = 0.0;
};

/// (M_n(eps), m_n(eps), M_n, m_n, S_n) for one replicate.
///
/// With S_n = 0 the observed maximum is the lower support endpoint and the
/// observed minimum the upper one (-inf and +inf for Gaussian data).
struct ExtremalQuadruple {
  double max_eps = 0.0;
  double min_eps = 0.0;
  double max = 0.0;
  double min = 0.0;
  std::size_t s_n = 0;
  std::optional<NormalizedQuadruple> normalized;

  bool observed_any() const noexcept { return s_n > 0; }
};

inline ExtremalQuadruple compute_quadruple(std::span<const double> values, std::span<const std::uint8_t> indicators,
                                           const NormingConstants& nc, const Support& support = {}) {
  if (values.size() != indicators.size())
    throw InputError("compute_quadruple: path and indicator lengths differ");
  if (nc.n != 0 && values.size() != nc.n)
    throw InputError("compute_quadruple: path length differs from the norming constants' n");
  if (values.empty()) throw InputError("compute_quadruple: empty path");

  ExtremalQuadruple q;
  q.max = q.min = values[0];
  q.max_eps = support.lower;
  q.min_eps = support.upper;
  std::size_t observed = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    if (x > q.max) q.max = x;
    if (x < q.min) q.min = x;
    if (indicators[i]) {
      if (observed == 0) {
        q.max_eps = q.min_eps = x;
      } else {
        if (x > q.max_eps) q.max_eps = x;
        if (x < q.min_eps) q.min_eps = x;
      }
      ++observed;
    }
  }
  q.s_n = observed;
  q.normalized = NormalizedQuadruple{normalize_max(nc, q.max_eps), normalize_min(nc, q.min_eps),
                                     normalize_max(nc, q.max), normalize_min(nc, q.min)};
  return q;
}

inline ExtremalQuadruple compute_quadruple(const SamplePath& path, const IndicatorDraw& draw,
                                           const NormingConstants& nc, const Support& support = {}) {
  return compute_quadruple(std::span<const double>(path.values), std::span<const std::uint8_t>(draw.indicators), nc,
                           support);
}

/// Raw thresholds u_n(x2), v_n(y2), u_n(x1), v_n(y1) of one quad.
struct RawThresholds {
  double u2 = 0.0;
  double v2 = 0.0;
  double u1 = 0.0;
  double v1 = 0.0;
};

/// {v2 < m(eps) <= M(eps) <= u2, v1 < m <= M <= u1}. With S_n = 0 the
/// observed-sample constraint is vacuous.
inline bool event_holds(const ExtremalQuadruple& q, const RawThresholds& t) noexcept {
  const bool outer = t.v1 < q.min && q.max <= t.u1;
  if (!outer) return false;
  if (q.s_n == 0) return true;
  return t.v2 < q.min_eps && q.max_eps <= t.u2;
}

/// Max part {M(eps) <= u2, M <= u1}.
inline bool max_event_holds(const ExtremalQuadruple& q, const RawThresholds& t) noexcept {
  return q.max <= t.u1 && (q.s_n == 0 || q.max_eps <= t.u2);
}

/// Min part {m(eps) > v2, m > v1}.
inline bool min_event_holds(const ExtremalQuadruple& q, const RawThresholds& t) noexcept {
  return t.v1 < q.min && (q.s_n == 0 || t.v2 < q.min_eps);
}

}  // namespace evlab

#endif  // EVLAB_EXTREMAL_HPP
