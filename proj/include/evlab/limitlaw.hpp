#ifndef EVLAB_LIMITLAW_HPP
#define EVLAB_LIMITLAW_HPP

/** @file
 * Limiting joint law of the complete and incomplete maxima and minima.
 *
 * For inner levels (x2, y2) applied to the observed sample and outer levels
 * (x1, y1) applied to the complete sample,
 *
 *   P(v_n(y2) < m_n(eps) <= M_n(eps) <= u_n(x2), v_n(y1) < m_n <= M_n <= u_n(x1))
 *     -> E[ G^P(x2) Hbar^P(y2) G^{1-P}(x1) Hbar^{1-P}(y1) ],
 *
 * where P is the limiting observed fraction. Everything is evaluated through
 * the tail functionals g = -ln G and h = -ln Hbar, so the integrand is
 * exp(-P (g2 + h2) - (1 - P)(g1 + h1)).
 *
 * The observed sample is a subset of the complete one, so the effective inner
 * constraint is the intersection of the inner and outer ones: we use
 * g2 <- max(g(x2), g(x1)) and h2 <- max(h(y2), h(y1)). This is the identity
 * whenever the inner levels are at least as strict as the outer ones.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "evlab/error.hpp"
#include "evlab/missing.hpp"
#include "evlab/norming.hpp"
#include "evlab/quadrature.hpp"

namespace evlab {

/// Piecewise-linear table of (level, tail value) with monotone tail values.
struct TailTable {
  std::vector<std::pair<double, double>> points;

  friend bool operator==(const TailTable&, const TailTable&) = default;
};

/**
 * The pair of limit laws (G, Hbar) through their tail functionals.
 *
 * Gumbel: g(x) = exp(-x), h(y) = exp(-y), i.e. G = Hbar = exp(-exp(-x)); this
 * is the Gaussian case with v_n(y) = -c_n y - d_n. Custom: user tables with
 * linear interpolation between points and constant extension beyond them;
 * g must be nonincreasing, h monotone in either direction.
 */
class LimitSpec {
 public:
  enum class Family { gumbel, custom };

  static LimitSpec gumbel() { return LimitSpec{}; }

  static LimitSpec custom(TailTable g, TailTable h) {
    check_table(g, "g");
    check_table(h, "h");
    if (!nonincreasing(g)) throw InputError("limit spec: g tail must be nonincreasing in x");
    LimitSpec spec;
    spec.family_ = Family::custom;
    spec.h_increasing_ = !nonincreasing(h);
    spec.g_ = std::move(g);
    spec.h_ = std::move(h);
    return spec;
  }

  Family family() const noexcept { return family_; }
  const TailTable& g_table() const noexcept { return g_; }
  const TailTable& h_table() const noexcept { return h_; }

  /// -ln G(x); 0 at +inf, +inf at -inf.
  double g_tail(double x) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (x == inf) return 0.0;
    if (x == -inf) return inf;
    return family_ == Family::gumbel ? std::exp(-x) : interpolate(g_, x);
  }

  /// -ln Hbar(y); 0 at the vacuous end, +inf at the other.
  double h_tail(double y) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (std::isinf(y)) return y == vacuous_y() ? 0.0 : inf;
    return family_ == Family::gumbel ? std::exp(-y) : interpolate(h_, y);
  }

  double G(double x) const { return std::exp(-g_tail(x)); }
  double H_bar(double y) const { return std::exp(-h_tail(y)); }

  /// Level at which the max constraint is void (+inf).
  static constexpr double vacuous_x() noexcept { return std::numeric_limits<double>::infinity(); }

  /// Level at which the min constraint is void: +inf when Hbar increases in y
  /// (Gumbel), -inf when it decreases.
  double vacuous_y() const noexcept {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return family_ == Family::gumbel || !h_increasing_ ? inf : -inf;
  }

  friend bool operator==(const LimitSpec&, const LimitSpec&) = default;

 private:
  static void check_table(const TailTable& t, const char* name) {
    if (t.points.empty()) throw InputError(std::string("limit spec: ") + name + " table is empty");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto [lvl, val] = t.points[i];
      if (!std::isfinite(lvl)) throw InputError(std::string("limit spec: ") + name + " levels must be finite");
      if (!(val >= 0.0)) throw InputError(std::string("limit spec: ") + name + " tail values must be nonnegative");
      if (i > 0 && !(lvl > t.points[i - 1].first))
        throw InputError(std::string("limit spec: ") + name + " levels must be strictly increasing");
    }
    bool up = true, down = true;
    for (std::size_t i = 1; i < t.points.size(); ++i) {
      up = up && t.points[i].second >= t.points[i - 1].second;
      down = down && t.points[i].second <= t.points[i - 1].second;
    }
    if (!up && !down) throw InputError(std::string("limit spec: ") + name + " tail values must be monotone");
  }

  static bool nonincreasing(const TailTable& t) {
    for (std::size_t i = 1; i < t.points.size(); ++i)
      if (t.points[i].second > t.points[i - 1].second) return false;
    return true;
  }

  static double interpolate(const TailTable& t, double x) {
    const auto& p = t.points;
    if (x <= p.front().first) return p.front().second;
    if (x >= p.back().first) return p.back().second;
    auto it = std::upper_bound(p.begin(), p.end(), x, [](double v, const auto& pt) { return v < pt.first; });
    const auto& [x1, v1] = *it;
    const auto& [x0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (x - x0) / (x1 - x0);
  }

  Family family_ = Family::gumbel;
  bool h_increasing_ = false;
  TailTable g_;
  TailTable h_;
};

/// Inner levels (x2, y2) for the observed sample, outer (x1, y1) for the
/// complete sample. Field order matches the CSV column order.
struct ThresholdQuad {
  double x2 = 0.0;
  double y2 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  /// Rejects NaN levels and a finite inner max level above the outer one.
  /// x2 = +inf (no constraint on the observed maximum) is always allowed.
  void validate() const {
    if (std::isnan(x2) || std::isnan(y2) || std::isnan(x1) || std::isnan(y1))
      throw InputError("threshold quad: levels must not be NaN");
    if (x2 > x1 && !std::isinf(x2)) throw InputError("threshold quad: ordering violation, x2 must not exceed x1");
  }

  friend bool operator==(const ThresholdQuad&, const ThresholdQuad&) = default;
};

namespace detail {

// exp(-(p * inner + (1 - p) * outer)) with 0 * inf = 0.
inline double mixed_power(double p, double inner, double outer) {
  const double a = p == 0.0 ? 0.0 : p * inner;
  const double b = p == 1.0 ? 0.0 : (1.0 - p) * outer;
  return std::exp(-(a + b));
}

// Breakpoints splitting [lo, hi] so that exp(-rate * t) varies by a bounded
// factor on every panel: lo, lo + w, lo + 2w, lo + 4w, ... with w = 32 / rate.
inline std::vector<double> exponential_panels(double lo, double hi, double rate) {
  std::vector<double> cuts{lo};
  if (std::isfinite(rate) && rate > 32.0) {
    double w = 32.0 / rate;
    while (lo + w < hi) {
      cuts.push_back(lo + w);
      w *= 2.0;
    }
  } else if (std::isinf(rate)) {
    for (double w = 1e-12; lo + w < hi; w *= 2.0) cuts.push_back(lo + w);
  }
  cuts.push_back(hi);
  return cuts;
}

// Integral over [0, hi] on panels halving towards 0. After the Beta endpoint
// substitution the integrand still carries a fractional power of s, which a
// single Gauss-Legendre panel resolves only to ~1e-10.
template <typename Rule, typename G>
double graded_integral(const Rule& gl, const G& g, double hi) {
  double sum = 0.0;
  double b = hi;
  for (int k = 0; k < 40; ++k) {
    sum += gl.integrate(g, 0.5 * b, b);
    b *= 0.5;
  }
  return sum + gl.integrate(g, 0.0, b);
}

}  // namespace detail

/**
 * E[f(P)] for P ~ pd.
 *
 * Point masses and discrete laws are summed exactly. Uniform and Beta laws
 * use 64-point Gauss-Legendre panels; `rate` is the decay scale of f near
 * P = 0 (f ~ exp(-rate P)) and adds geometric panels there. A Beta endpoint
 * with shape parameter below 1 is handled by the substitution s = p^alpha
 * (resp. (1-p)^beta) on the panel touching it.
 */
template <typename F>
double expectation(const PDistribution& pd, F&& f, double rate = 0.0) {
  const auto& gl = gauss_legendre_64();
  switch (pd.kind) {
    case PDistribution::Kind::point_mass: return f(pd.p);
    case PDistribution::Kind::discrete: {
      double sum = 0.0;
      for (const auto& a : pd.atoms)
        if (a.weight > 0.0) sum += a.weight * f(a.value);
      return sum;
    }
    case PDistribution::Kind::uniform: {
      const auto cuts = detail::exponential_panels(pd.lower, pd.upper, rate);
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += gl.integrate(f, cuts[i], cuts[i + 1]);
      return sum / (pd.upper - pd.lower);
    }
    case PDistribution::Kind::beta: {
      const double al = pd.alpha;
      const double be = pd.beta;
      const double log_norm = std::lgamma(al + be) - std::lgamma(al) - std::lgamma(be);
      auto density = [&](double p) {
        return std::exp(log_norm + (al - 1.0) * std::log(p) + (be - 1.0) * std::log1p(-p));
      };
      auto cuts = detail::exponential_panels(0.0, 1.0, rate);
      if (std::find(cuts.begin(), cuts.end(), 0.5) == cuts.end()) {
        cuts.push_back(0.5);
        std::sort(cuts.begin(), cuts.end());
      }
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        if (lo == 0.0 && al < 1.0) {
          // p = s^(1/alpha): p^(alpha-1) dp = ds / alpha
          auto g = [&](double s) {
            const double p = std::pow(s, 1.0 / al);
            return f(p) * std::exp(log_norm + (be - 1.0) * std::log1p(-p)) / al;
          };
          sum += detail::graded_integral(gl, g, std::pow(hi, al));
        } else if (hi == 1.0 && be < 1.0) {
          // 1 - p = s^(1/beta)
          auto g = [&](double s) {
            const double q = std::pow(s, 1.0 / be);
            const double p = 1.0 - q;
            return f(p) * std::exp(log_norm + (al - 1.0) * std::log(p)) / be;
          };
          sum += detail::graded_integral(gl, g, std::pow(1.0 - lo, be));
        } else {
          sum += gl.integrate([&](double p) { return f(p) * density(p); }, lo, hi);
        }
      }
      return sum;
    }
  }
  return 0.0;
}

/// Tail exponents (inner, outer) of a quad after intersecting the inner
/// constraint with the outer one.
struct TailExponents {
  double inner = 0.0;  ///< g(x2) + h(y2), at least the outer value
  double outer = 0.0;  ///< g(x1) + h(y1)
};

inline TailExponents tail_exponents(const LimitSpec& spec, const ThresholdQuad& q) {
  const double g1 = spec.g_tail(q.x1);
  const double h1 = spec.h_tail(q.y1);
  const double g2 = std::max(spec.g_tail(q.x2), g1);
  const double h2 = std::max(spec.h_tail(q.y2), h1);
  return {g2 + h2, g1 + h1};
}

namespace detail {

inline double mixed_expectation(const PDistribution& pd, double inner, double outer) {
  const double rate = inner - outer;
  return expectation(
      pd, [&](double p) { return mixed_power(p, inner, outer); }, rate);
}

}  // namespace detail

/// E[G^P(x2) Hbar^P(y2) G^{1-P}(x1) Hbar^{1-P}(y1)] (with intersected inner levels).
inline double joint_limit(const LimitSpec& spec, const ThresholdQuad& q, const PDistribution& pd) {
  q.validate();
  const auto e = tail_exponents(spec, q);
  return std::clamp(detail::mixed_expectation(pd, e.inner, e.outer), 0.0, 1.0);
}

/// Max-only marginal E[G^P(x2) G^{1-P}(x1)].
inline double max_only_limit(const LimitSpec& spec, double x2, double x1, const PDistribution& pd) {
  if (std::isnan(x2) || std::isnan(x1)) throw InputError("max_only_limit: levels must not be NaN");
  if (x2 > x1) throw InputError("max_only_limit: ordering violation, x2 must not exceed x1");
  const double g1 = spec.g_tail(x1);
  const double g2 = std::max(spec.g_tail(x2), g1);
  return std::clamp(detail::mixed_expectation(pd, g2, g1), 0.0, 1.0);
}

/// Min-only marginal E[Hbar^P(y2) Hbar^{1-P}(y1)].
inline double min_only_limit(const LimitSpec& spec, double y2, double y1, const PDistribution& pd) {
  if (std::isnan(y2) || std::isnan(y1)) throw InputError("min_only_limit: levels must not be NaN");
  const double h1 = spec.h_tail(y1);
  const double h2 = std::max(spec.h_tail(y2), h1);
  return std::clamp(detail::mixed_expectation(pd, h2, h1), 0.0, 1.0);
}

/// Observed-sample event only: E[(G(x) Hbar(y))^P].
inline double single_threshold_limit(const LimitSpec& spec, double x, double y, const PDistribution& pd) {
  if (std::isnan(x) || std::isnan(y)) throw InputError("single_threshold_limit: levels must not be NaN");
  const double t = spec.g_tail(x) + spec.h_tail(y);
  return std::clamp(detail::mixed_expectation(pd, t, 0.0), 0.0, 1.0);
}

struct Factorization {
  double joint = 0.0;
  double product = 0.0;
  double difference = 0.0;
};

/// Joint law vs the product of the max-only and min-only marginals.
/// For a point mass the difference vanishes (asymptotic independence).
inline Factorization factorization_check(const LimitSpec& spec, const ThresholdQuad& q, const PDistribution& pd) {
  Factorization f;
  f.joint = joint_limit(spec, q, pd);
  f.product = max_only_limit(spec, q.x2, q.x1, pd) * min_only_limit(spec, q.y2, q.y1, pd);
  f.difference = f.joint - f.product;
  return f;
}

inline Factorization factorization_check(const LimitSpec& spec, const ThresholdQuad& q, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("factorization_check: p must lie in [0, 1]");
  return factorization_check(spec, q, PDistribution::point_mass(p));
}

}  // namespace evlab

#endif  // EVLAB_LIMITLAW_HPP
