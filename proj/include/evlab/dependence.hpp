#ifndef EVLAB_DEPENDENCE_HPP
#define EVLAB_DEPENDENCE_HPP

/** @file
 * Correlation models for stationary standard Gaussian sequences and
 * numerical diagnostics for the weak-dependence conditions under which
 * their extremes behave as in the iid case:
 *
 *  - Berman:  rho_n ln n -> 0,
 *  - Davis:   sum_n |rho_n|^p < inf for some p > 1,
 *  - D'(u_n(x), v_n(y)): the four-term double-threshold sum vanishing as k grows.
 *
 * The mixing condition D itself is not computable for a general model; it is
 * assumed to hold whenever Berman or Davis does.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "evlab/error.hpp"
#include "evlab/normal.hpp"
#include "evlab/norming.hpp"

namespace evlab {

/// Correlations of the capped models never exceed this value at lags >= 1.
inline constexpr double kRhoCap = 1.0 - 1e-9;

/// Analytic autocorrelation function of a stationary Gaussian sequence.
struct CorrelationModel {
  enum class Kind { iid, ar1, power_decay, log_decay };

  Kind kind = Kind::iid;
  double phi = 0.0;    ///< ar1
  double c = 1.0;      ///< power_decay, log_decay
  double alpha = 1.0;  ///< power_decay

  static CorrelationModel iid() { return {}; }

  static CorrelationModel ar1(double phi) {
    if (!(std::abs(phi) < 1.0)) throw InputError("ar1: phi must lie in (-1, 1), got " + std::to_string(phi));
    return {Kind::ar1, phi, 1.0, 1.0};
  }

  /// rho_k = min(cap, c k^-alpha)
  static CorrelationModel power_decay(double c, double alpha) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("power_decay: c must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("power_decay: alpha must be positive");
    return {Kind::power_decay, 0.0, c, alpha};
  }

  /// rho_k = min(cap, c / ln(k + e))
  static CorrelationModel log_decay(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("log_decay: c must be positive");
    return {Kind::log_decay, 0.0, c, 1.0};
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::iid: os << "iid"; break;
      case Kind::ar1: os << "ar1(phi=" << phi << ")"; break;
      case Kind::power_decay: os << "power(c=" << c << ", alpha=" << alpha << ")"; break;
      case Kind::log_decay: os << "log(c=" << c << ")"; break;
    }
    return os.str();
  }

  friend bool operator==(const CorrelationModel&, const CorrelationModel&) = default;
};

/// Lag-k correlation; rho_0 = 1 exactly.
inline double rho_at(const CorrelationModel& model, std::uint64_t k) {
  if (k == 0) return 1.0;
  const double lag = static_cast<double>(k);
  switch (model.kind) {
    case CorrelationModel::Kind::iid: return 0.0;
    case CorrelationModel::Kind::ar1: return std::pow(model.phi, lag);
    case CorrelationModel::Kind::power_decay: return std::min(kRhoCap, model.c * std::pow(lag, -model.alpha));
    case CorrelationModel::Kind::log_decay: return std::min(kRhoCap, model.c / std::log(lag + std::numbers::e));
  }
  return 0.0;
}

/// rho_n ln n
inline double berman_statistic(const CorrelationModel& model, std::uint64_t n) {
  if (n < 2) throw InputError("berman_statistic: n must be at least 2");
  return rho_at(model, n) * std::log(static_cast<double>(n));
}

/// Truncated sum_{k=1..N} |rho_k|^p.
inline double davis_sum(const CorrelationModel& model, double p, std::uint64_t N) {
  if (!(p > 1.0)) throw InputError("davis_sum: p must exceed 1");
  if (N < 1) throw InputError("davis_sum: N must be at least 1");
  double sum = 0.0;
  for (std::uint64_t k = 1; k <= N; ++k) sum += std::pow(std::abs(rho_at(model, k)), p);
  return sum;
}

namespace detail {

// Bisecting Gauss-Kronrod with an absolute floor. Boost's own adaptive driver
// uses a purely relative test, which never terminates on integrands that
// underflow to subnormals.
template <typename F>
double adaptive_gk(const F& f, double a, double b, int depth) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  const double v = Rule::integrate(f, a, b, 0, 0.0, &err);
  if (depth == 0 || err <= 1e-15 || err <= 1e-13 * std::abs(v)) return v;
  const double mid = 0.5 * (a + b);
  return adaptive_gk(f, a, mid, depth - 1) + adaptive_gk(f, mid, b, depth - 1);
}

}  // namespace detail

/**
 * P(a_lo < X <= a_hi, b_lo < Y <= b_hi) for a standard bivariate normal pair
 * with correlation rho.
 *
 * Integrates phi(t) [Phi((b_hi - rho t)/s) - Phi((b_lo - rho t)/s)],
 * s = sqrt(1 - rho^2), over t in (a_lo, a_hi] clipped to [-8.5, 8.5], with
 * adaptive Gauss-Kronrod split at the points where the conditional interval
 * edges cross zero. Infinite bounds are allowed.
 */
inline double bvn_rect(double a_lo, double a_hi, double b_lo, double b_hi, double rho) {
  if (!(a_lo < a_hi)) throw InputError("bvn_rect: first interval is empty (lo >= hi)");
  if (!(b_lo < b_hi)) throw InputError("bvn_rect: second interval is empty (lo >= hi)");
  if (!(rho > -1.0 && rho < 1.0)) throw InputError("bvn_rect: rho must lie in (-1, 1)");

  constexpr double kClip = 8.5;
  const double lo = std::max(a_lo, -kClip);
  const double hi = std::min(a_hi, kClip);
  if (!(lo < hi)) return 0.0;

  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  auto integrand = [=](double t) {
    return normal_pdf(t) * normal_interval((b_lo - rho * t) / s, (b_hi - rho * t) / s);
  };

  std::vector<double> cuts{lo, hi};
  if (rho != 0.0) {
    for (double edge : {b_lo, b_hi}) {
      if (!std::isfinite(edge)) continue;
      const double t = edge / rho;
      if (t > lo && t < hi) cuts.push_back(t);
    }
  }
  if (0.0 > lo && 0.0 < hi) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i] < cuts[i + 1])) continue;
    total += detail::adaptive_gk(integrand, cuts[i], cuts[i + 1], 40);
  }
  return std::clamp(total, 0.0, 1.0);
}

/**
 * Truncated D'(u_n(x), v_n(y)) sum
 *
 *   n sum_{j=1..floor(n/k)} [ P(X_1 > u, X_{j+1} > u) + P(X_1 > u, X_{j+1} <= v)
 *                            + P(X_1 <= v, X_{j+1} > u) + P(X_1 <= v, X_{j+1} <= v) ]
 *
 * with u = u_n(x), v = v_n(y), each term an exact bivariate-normal rectangle
 * probability at lag correlation rho_j.
 */
inline double dprime_sum(const CorrelationModel& model, std::uint64_t n, std::uint64_t k, double x, double y,
                         const NormingConstants& norming) {
  if (k < 1 || n < k) throw InputError("dprime_sum: requires n >= k >= 1");
  if (norming.n != n) throw InputError("dprime_sum: norming constants were built for a different n");
  const double inf = std::numeric_limits<double>::infinity();
  const double u = u_threshold(norming, x);
  const double v = v_threshold(norming, y);
  double sum = 0.0;
  for (std::uint64_t j = 1; j <= n / k; ++j) {
    const double r = rho_at(model, j);
    double term = 0.0;
    if (u < inf) term += bvn_rect(u, inf, u, inf, r);
    if (u < inf && v > -inf) term += bvn_rect(u, inf, -inf, v, r) + bvn_rect(-inf, v, u, inf, r);
    if (v > -inf) term += bvn_rect(-inf, v, -inf, v, r);
    sum += term;
  }
  return static_cast<double>(n) * sum;
}

// ---------------------------------------------------------------------------
// Numerical verdicts

enum class Verdict { satisfied_numerically, violated_numerically, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied_numerically: return "SatisfiedNumerically";
    case Verdict::violated_numerically: return "ViolatedNumerically";
    case Verdict::inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct TrajectoryPoint {
  std::uint64_t n = 0;
  double value = 0.0;
};

/// Finite-n cutoffs. Verdicts are heuristics on truncated trajectories.
struct ConditionCutoffs {
  double berman = 0.05;           ///< level the last Berman value must fall below
  double dprime = 0.05;           ///< level the last D' value must fall below
  double davis_increment = 1e-6;  ///< bound on the partial-sum growth over the last decade
};

struct ConditionReport {
  std::vector<TrajectoryPoint> berman_values;
  std::vector<TrajectoryPoint> davis_partial_sums;
  std::vector<TrajectoryPoint> dprime_values;
  double davis_p = 2.0;
  Verdict berman = Verdict::inconclusive;
  Verdict davis = Verdict::inconclusive;
  Verdict dprime = Verdict::inconclusive;
};

namespace detail {

// Points whose index lies within the last decade, i.e. n >= n_last / 10.
inline std::vector<TrajectoryPoint> last_decade(const std::vector<TrajectoryPoint>& traj) {
  const double floor_n = static_cast<double>(traj.back().n) / 10.0;
  std::vector<TrajectoryPoint> out;
  for (const auto& pt : traj)
    if (static_cast<double>(pt.n) >= floor_n) out.push_back(pt);
  return out;
}

// Value at the largest index not above n_last / 10 (or the first point).
inline double decade_back_value(const std::vector<TrajectoryPoint>& traj) {
  const double floor_n = static_cast<double>(traj.back().n) / 10.0;
  double value = traj.front().value;
  for (const auto& pt : traj)
    if (static_cast<double>(pt.n) <= floor_n) value = pt.value;
  return value;
}

inline Verdict vanishing_verdict(const std::vector<TrajectoryPoint>& traj, double cutoff) {
  const auto tail = last_decade(traj);
  bool nonincreasing = true;
  for (std::size_t i = 1; i < tail.size(); ++i)
    if (std::abs(tail[i].value) > std::abs(tail[i - 1].value)) nonincreasing = false;
  const double last = std::abs(traj.back().value);
  if (last < cutoff && nonincreasing) return Verdict::satisfied_numerically;
  if (last >= cutoff && last >= std::abs(decade_back_value(traj))) return Verdict::violated_numerically;
  return Verdict::inconclusive;
}

inline Verdict summable_verdict(const std::vector<TrajectoryPoint>& partial, double cutoff) {
  const double last = partial.back().value;
  const double increment = last - decade_back_value(partial);
  if (increment < cutoff) return Verdict::satisfied_numerically;
  // Growth over the previous decade, for a divergence check.
  std::vector<TrajectoryPoint> earlier;
  const double floor_n = static_cast<double>(partial.back().n) / 10.0;
  for (const auto& pt : partial)
    if (static_cast<double>(pt.n) <= floor_n) earlier.push_back(pt);
  if (earlier.size() >= 2) {
    const double previous = earlier.back().value - decade_back_value(earlier);
    if (increment >= previous) return Verdict::violated_numerically;
  }
  return Verdict::inconclusive;
}

}  // namespace detail

/// Attach verdicts to the three trajectories (each must be non-empty and
/// sorted by index). Deterministic in the trajectories and cutoffs.
inline ConditionReport classify_conditions(std::vector<TrajectoryPoint> berman, std::vector<TrajectoryPoint> davis,
                                           std::vector<TrajectoryPoint> dprime, const ConditionCutoffs& cutoffs = {},
                                           double davis_p = 2.0) {
  if (berman.empty() || davis.empty() || dprime.empty())
    throw InputError("classify_conditions: trajectories must be non-empty");
  ConditionReport report;
  report.berman = detail::vanishing_verdict(berman, cutoffs.berman);
  report.davis = detail::summable_verdict(davis, cutoffs.davis_increment);
  report.dprime = detail::vanishing_verdict(dprime, cutoffs.dprime);
  report.berman_values = std::move(berman);
  report.davis_partial_sums = std::move(davis);
  report.dprime_values = std::move(dprime);
  report.davis_p = davis_p;
  return report;
}

/// Grids and levels for `check_conditions`.
struct CheckOptions {
  double davis_p = 2.0;
  std::uint64_t berman_max_n = 1'000'000;
  int berman_points_per_decade = 4;
  std::uint64_t davis_max_N = 1'000'000;
  std::uint64_t dprime_max_n = 1'000'000;
  double dprime_x = 0.0;
  double dprime_y = 0.0;
  ConditionCutoffs cutoffs{};
};

/// Logarithmic grid 10^(i/per_decade) from 10 up to max_n (inclusive), deduplicated.
inline std::vector<std::uint64_t> log_grid(std::uint64_t max_n, int per_decade) {
  std::vector<std::uint64_t> grid;
  for (int i = per_decade;; ++i) {
    const auto n = static_cast<std::uint64_t>(std::llround(std::pow(10.0, static_cast<double>(i) / per_decade)));
    if (n > max_n) break;
    if (grid.empty() || grid.back() != n) grid.push_back(n);
  }
  if (grid.empty() || grid.back() != max_n) grid.push_back(max_n);
  return grid;
}

/**
 * Run the three diagnostics on logarithmic grids and classify.
 *
 * The D' trajectory uses k = floor(sqrt(n)) blocks so that k grows along the
 * trajectory; for an iid sequence the sum then behaves like 4/k -> 0.
 */
inline ConditionReport check_conditions(const CorrelationModel& model, const CheckOptions& opt = {}) {
  std::vector<TrajectoryPoint> berman;
  for (auto n : log_grid(opt.berman_max_n, opt.berman_points_per_decade))
    berman.push_back({n, berman_statistic(model, n)});

  std::vector<TrajectoryPoint> davis;
  {
    const auto grid = log_grid(opt.davis_max_N, opt.berman_points_per_decade);
    double sum = 0.0;
    std::uint64_t k = 0;
    for (auto N : grid) {
      for (; k < N;) {
        ++k;
        sum += std::pow(std::abs(rho_at(model, k)), opt.davis_p);
      }
      davis.push_back({N, sum});
    }
  }

  std::vector<TrajectoryPoint> dprime;
  for (auto n : log_grid(opt.dprime_max_n, 1)) {
    if (n < 100) continue;
    const auto k = static_cast<std::uint64_t>(std::floor(std::sqrt(static_cast<double>(n))));
    dprime.push_back({n, dprime_sum(model, n, k, opt.dprime_x, opt.dprime_y, gaussian_norming(n))});
  }
  return classify_conditions(std::move(berman), std::move(davis), std::move(dprime), opt.cutoffs, opt.davis_p);
}

/// CSV with columns (condition, n_or_N, value), then a verdict block.
inline void write_condition_report(std::ostream& os, const ConditionReport& report) {
  char buf[64];
  auto emit = [&](const char* name, const std::vector<TrajectoryPoint>& traj) {
    for (const auto& pt : traj) {
      std::snprintf(buf, sizeof buf, "%.12g", pt.value);
      os << name << ',' << pt.n << ',' << buf << '\n';
    }
  };
  os << "condition,n_or_N,value\n";
  emit("berman", report.berman_values);
  emit("davis", report.davis_partial_sums);
  emit("dprime", report.dprime_values);
  os << '\n' << "condition,verdict\n";
  os << "berman," << to_string(report.berman) << '\n';
  std::snprintf(buf, sizeof buf, "%g", report.davis_p);
  os << "davis(p=" << buf << ")," << to_string(report.davis) << '\n';
  os << "dprime," << to_string(report.dprime) << '\n';
}

}  // namespace evlab

#endif  // EVLAB_DEPENDENCE_HPP
