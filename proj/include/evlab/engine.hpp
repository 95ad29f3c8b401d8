#ifndef EVLAB_ENGINE_HPP
#define EVLAB_ENGINE_HPP

/** @file
 * Monte Carlo experiments on the joint event of complete and incomplete
 * extremes, compared against the limit law and, for iid data, against the
 * exact finite-n law.
 *
 * Every replicate r draws its path from stream (seed, r, path) and its
 * indicators from (seed, r, indicators). Replicates are distributed over a
 * worker pool but results are stored by index and aggregated in index order,
 * so every reported number is independent of the number of workers.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "evlab/dependence.hpp"
#include "evlab/error.hpp"
#include "evlab/extremal.hpp"
#include "evlab/genpath.hpp"
#include "evlab/limitlaw.hpp"
#include "evlab/missing.hpp"
#include "evlab/normal.hpp"
#include "evlab/norming.hpp"
#include "evlab/rng.hpp"

namespace evlab {

enum class NormingChoice { auto_gaussian, explicit_constants };

struct ExperimentConfig {
  CorrelationModel correlation;
  SamplerKind sampler = SamplerKind::automatic;
  MissingnessModel missingness;
  std::size_t n = 1000;
  std::size_t reps = 1000;
  std::vector<ThresholdQuad> thresholds;
  NormingChoice norming = NormingChoice::auto_gaussian;
  NormingConstants explicit_norming;  ///< used with NormingChoice::explicit_constants
  LimitSpec limit = LimitSpec::gumbel();
  std::uint64_t base_seed = 0;
  unsigned workers = 1;

  void validate() const {
    if (n < 3) throw InputError("experiment: n must be at least 3");
    if (reps < 1) throw InputError("experiment: reps must be at least 1");
    if (workers < 1) throw InputError("experiment: workers must be at least 1");
    for (const auto& q : thresholds) q.validate();
    if (norming == NormingChoice::explicit_constants) explicit_norming.validate();
  }

  NormingConstants norming_constants() const {
    if (norming == NormingChoice::auto_gaussian) return gaussian_norming(n);
    NormingConstants nc = explicit_norming;
    nc.n = n;
    return nc;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Empirical vs theoretical probability of one quad's event.
struct EstimateRow {
  ThresholdQuad quad;
  std::size_t hits = 0;
  double empirical = 0.0;
  double std_err = 0.0;  ///< sqrt(empirical (1 - empirical) / reps)
  double theoretical = 0.0;
  double abs_dev = 0.0;
  double dev_in_se = 0.0;  ///< abs_dev / std_err, +inf when std_err = 0

  friend bool operator==(const EstimateRow&, const EstimateRow&) = default;
};

struct ExperimentResult {
  std::vector<EstimateRow> rows;
  std::vector<ExtremalQuadruple> sample;  ///< one per replicate, in replicate order
  NormingConstants norming;
  PDistribution comparator;  ///< law of P used for the theoretical column
  std::size_t empty_observation_count = 0;
  std::size_t clipped_eigenvalues = 0;
  double wall_seconds = 0.0;
};

inline RawThresholds raw_thresholds(const NormingConstants& nc, const ThresholdQuad& q) {
  return {u_threshold(nc, q.x2), v_threshold(nc, q.y2), u_threshold(nc, q.x1), v_threshold(nc, q.y1)};
}

inline EstimateRow make_row(const ThresholdQuad& quad, std::size_t hits, std::size_t reps, double theoretical) {
  EstimateRow row;
  row.quad = quad;
  row.hits = hits;
  row.empirical = static_cast<double>(hits) / static_cast<double>(reps);
  row.std_err = std::sqrt(row.empirical * (1.0 - row.empirical) / static_cast<double>(reps));
  row.theoretical = theoretical;
  row.abs_dev = std::abs(row.empirical - row.theoretical);
  row.dev_in_se = row.std_err > 0.0 ? row.abs_dev / row.std_err : std::numeric_limits<double>::infinity();
  return row;
}

/// Generate every replicate's quadruple (no event evaluation).
inline std::vector<ExtremalQuadruple> simulate_quadruples(const ExperimentConfig& cfg, const NormingConstants& nc,
                                                          std::size_t* clipped = nullptr) {
  const PathSampler sampler(cfg.correlation, cfg.n, cfg.sampler);
  if (clipped) *clipped = sampler.embedding() ? sampler.embedding()->clipped() : 0;

  std::vector<ExtremalQuadruple> sample(cfg.reps);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::optional<ReplicateError> first_error;

  auto work = [&] {
    std::vector<double> path(cfg.n);
    IndicatorDraw draw;
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= cfg.reps || failed.load()) return;
      try {
        const SeedInfo seed{cfg.base_seed, r};
        sampler.sample(seed, path);
        draw_indicators_into(cfg.missingness, cfg.n, seed, draw);
        sample[r] = compute_quadruple(std::span<const double>(path), std::span<const std::uint8_t>(draw.indicators), nc);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!first_error || r < first_error->replicate()) first_error.emplace(r, e.what());
        failed.store(true);
        return;
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cfg.reps)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) throw *first_error;
  return sample;
}

/// Run one experiment: simulate, count events per quad, attach the limit law.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  ExperimentResult result;
  result.norming = cfg.norming_constants();
  result.comparator = cfg.missingness.limit_distribution(cfg.n);
  result.sample = simulate_quadruples(cfg, result.norming, &result.clipped_eigenvalues);

  for (const auto& q : result.sample)
    if (q.s_n == 0) ++result.empty_observation_count;

  result.rows.reserve(cfg.thresholds.size());
  for (const auto& quad : cfg.thresholds) {
    const RawThresholds t = raw_thresholds(result.norming, quad);
    std::size_t hits = 0;
    for (const auto& q : result.sample) hits += event_holds(q, t) ? 1 : 0;
    result.rows.push_back(make_row(quad, hits, cfg.reps, joint_limit(cfg.limit, quad, result.comparator)));
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Exact finite-n law under independence

namespace detail {

inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

// sum_s C(n,s) p^s (1-p)^(n-s) a^s b^(n-s)
inline double binomial_mixture(std::size_t n, double p, double a, double b) {
  const double nn = static_cast<double>(n);
  const double lgn = std::lgamma(nn + 1.0);
  double sum = 0.0;
  for (std::size_t s = 0; s <= n; ++s) {
    const double ss = static_cast<double>(s);
    const double log_term = lgn - std::lgamma(ss + 1.0) - std::lgamma(nn - ss + 1.0) + xlogy(ss, p * a) +
                            xlogy(nn - ss, (1.0 - p) * b);
    sum += std::exp(log_term);
  }
  return sum;
}

// (p a + (1 - p) b)^n
inline double conditional_power(std::size_t n, double p, double a, double b) {
  const double base = p * a + (1.0 - p) * b;
  return std::exp(xlogy(static_cast<double>(n), base));
}

}  // namespace detail

/**
 * Exact P(v2 < m(eps) <= M(eps) <= u2, v1 < m <= M <= u1) for n iid standard
 * normals, i.e. E[(Phi(u2) - Phi(v2))^S_n (Phi(u1) - Phi(v1))^(n - S_n)] over
 * the indicator law:
 *
 *  - iid Bernoulli: binomial sum,
 *  - Markov: two-state transfer recursion,
 *  - patterns: average over the pattern lines,
 *  - exchangeable: exact for point/discrete P; Monte Carlo over P with
 *    `mc_over_p` draws when positive, otherwise Gauss-Legendre quadrature.
 *
 * Requires nested intervals [v2, u2] within [v1, u1].
 */
inline double iid_oracle(const CorrelationModel& correlation, std::size_t n, const RawThresholds& t,
                         const MissingnessModel& missingness, std::size_t mc_over_p = 0,
                         std::uint64_t seed = 0) {
  if (correlation.kind != CorrelationModel::Kind::iid) throw InputError("iid_oracle: correlation must be iid");
  if (n < 1) throw InputError("iid_oracle: n must be positive");
  if (!(t.v2 < t.u2) || !(t.v1 < t.u1)) throw InputError("iid_oracle: thresholds require v < u");
  if (t.v2 < t.v1 || t.u2 > t.u1) throw InputError("iid_oracle: inner interval must lie within the outer one");

  const double a = normal_interval(t.v2, t.u2);
  const double b = normal_interval(t.v1, t.u1);
  if (a == b) return std::pow(b, static_cast<double>(n));

  switch (missingness.kind) {
    case MissingnessModel::Kind::iid_bernoulli: return detail::binomial_mixture(n, missingness.p, a, b);
    case MissingnessModel::Kind::two_state_markov: {
      const double pi1 = missingness.stationary_probability();
      const double p01 = missingness.p01;
      const double p10 = missingness.p10;
      // forward weights of (state 0, state 1), rescaled to avoid underflow
      double w0 = (1.0 - pi1) * b;
      double w1 = pi1 * a;
      double log_scale = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double n0 = (w0 * (1.0 - p01) + w1 * p10) * b;
        const double n1 = (w0 * p01 + w1 * (1.0 - p10)) * a;
        const double s = n0 + n1;
        if (s == 0.0) return 0.0;
        w0 = n0 / s;
        w1 = n1 / s;
        log_scale += std::log(s);
      }
      return std::exp(log_scale) * (w0 + w1);
    }
    case MissingnessModel::Kind::deterministic_pattern: {
      double sum = 0.0;
      for (const auto& pat : missingness.patterns) {
        if (pat.size() < n) throw InputError("iid_oracle: pattern shorter than n");
        std::size_t s = 0;
        for (std::size_t i = 0; i < n; ++i) s += pat[i];
        sum += std::exp(detail::xlogy(static_cast<double>(s), a) + detail::xlogy(static_cast<double>(n - s), b));
      }
      return sum / static_cast<double>(missingness.patterns.size());
    }
    case MissingnessModel::Kind::exchangeable: {
      const auto& pd = missingness.mixing;
      auto f = [&](double p) { return detail::conditional_power(n, p, a, b); };
      if (pd.kind == PDistribution::Kind::point_mass || pd.kind == PDistribution::Kind::discrete)
        return expectation(pd, f);
      if (mc_over_p > 0) {
        double sum = 0.0;
        for (std::size_t k = 0; k < mc_over_p; ++k) {
          Engine engine = make_engine(SeedInfo{seed, k}, Stream::auxiliary);
          sum += f(pd.sample(engine));
        }
        return sum / static_cast<double>(mc_over_p);
      }
      const double rate = b > 0.0 ? static_cast<double>(n) * std::max(0.0, 1.0 - a / b) : 0.0;
      return expectation(pd, f, rate);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Derived statistics

struct IndependenceGap {
  double joint = 0.0;
  double max_part = 0.0;
  double min_part = 0.0;
  double gap = 0.0;      ///< |joint - max_part * min_part|
  double std_err = 0.0;  ///< pooled binomial standard error of joint - product
};

/// Empirical dependence between the max and min parts of a quad's event.
inline IndependenceGap independence_gap(const ExperimentResult& result, const ThresholdQuad& quad) {
  if (result.sample.empty()) throw InputError("independence_gap: empty sample");
  quad.validate();
  const RawThresholds t = raw_thresholds(result.norming, quad);
  std::size_t joint = 0, max_hits = 0, min_hits = 0;
  for (const auto& q : result.sample) {
    joint += event_holds(q, t) ? 1 : 0;
    max_hits += max_event_holds(q, t) ? 1 : 0;
    min_hits += min_event_holds(q, t) ? 1 : 0;
  }
  const double reps = static_cast<double>(result.sample.size());
  IndependenceGap g;
  g.joint = static_cast<double>(joint) / reps;
  g.max_part = static_cast<double>(max_hits) / reps;
  g.min_part = static_cast<double>(min_hits) / reps;
  g.gap = std::abs(g.joint - g.max_part * g.min_part);
  const double var_joint = g.joint * (1.0 - g.joint) / reps;
  const double var_max = g.max_part * (1.0 - g.max_part) / reps;
  const double var_min = g.min_part * (1.0 - g.min_part) / reps;
  g.std_err = std::sqrt(var_joint + g.min_part * g.min_part * var_max + g.max_part * g.max_part * var_min);
  return g;
}

/// Empirical CDF on a grid plus quantiles.
struct EmpiricalSummary {
  std::vector<double> grid;
  std::vector<double> cdf;
  std::vector<double> probabilities;
  std::vector<double> quantiles;
};

inline EmpiricalSummary summarize(std::vector<double> values, const std::vector<double>& grid,
                                  const std::vector<double>& probabilities) {
  EmpiricalSummary s;
  s.grid = grid;
  s.probabilities = probabilities;
  std::sort(values.begin(), values.end());
  const double count = static_cast<double>(values.size());
  for (double g : grid) {
    const auto le = std::upper_bound(values.begin(), values.end(), g) - values.begin();
    s.cdf.push_back(values.empty() ? 0.0 : static_cast<double>(le) / count);
  }
  for (double p : probabilities) {
    if (values.empty()) {
      s.quantiles.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double h = (count - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    s.quantiles.push_back(values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]));
  }
  return s;
}

/// Laws of the normalized differences (m(eps) - m)/c_n, (M - M(eps))/a_n and
/// of the normalized complete-sample extremes, over replicates with S_n >= 1.
struct DifferenceSummary {
  std::size_t included = 0;
  std::size_t excluded = 0;  ///< replicates with S_n = 0
  EmpiricalSummary min_difference;
  EmpiricalSummary normalized_min;
  EmpiricalSummary max_difference;
  EmpiricalSummary normalized_max;
};

inline std::vector<double> default_difference_grid() {
  std::vector<double> grid;
  for (int i = -20; i <= 40; ++i) grid.push_back(0.25 * i);
  return grid;
}

inline DifferenceSummary difference_statistic(const ExperimentResult& result,
                                              const std::vector<double>& grid = default_difference_grid(),
                                              const std::vector<double>& probabilities = {0.05, 0.25, 0.5, 0.75,
                                                                                          0.95}) {
  const auto& nc = result.norming;
  std::vector<double> dmin, nmin, dmax, nmax;
  DifferenceSummary s;
  for (const auto& q : result.sample) {
    if (q.s_n == 0) {
      ++s.excluded;
      continue;
    }
    ++s.included;
    dmin.push_back((q.min_eps - q.min) / nc.c);
    nmin.push_back(normalize_min(nc, q.min));
    dmax.push_back((q.max - q.max_eps) / nc.a);
    nmax.push_back(normalize_max(nc, q.max));
  }
  s.min_difference = summarize(std::move(dmin), grid, probabilities);
  s.normalized_min = summarize(std::move(nmin), grid, probabilities);
  s.max_difference = summarize(std::move(dmax), grid, probabilities);
  s.normalized_max = summarize(std::move(nmax), grid, probabilities);
  return s;
}

struct SweepPoint {
  std::size_t n = 0;
  double max_abs_dev = 0.0;
  double std_err = 0.0;  ///< std_err of the row attaining max_abs_dev
  std::size_t quad_index = 0;
  std::vector<EstimateRow> rows;
};

struct SweepReport {
  std::vector<SweepPoint> points;

  /// Each deviation is at most the previous one plus `k` pooled standard errors.
  bool nonincreasing_within(double k) const {
    for (std::size_t i = 1; i < points.size(); ++i) {
      const double pooled = std::hypot(points[i - 1].std_err, points[i].std_err);
      if (points[i].max_abs_dev > points[i - 1].max_abs_dev + k * pooled) return false;
    }
    return true;
  }
};

/// run_experiment at each n (strictly increasing), recording the largest
/// |empirical - theoretical| over the quads. Requires automatic norming.
/// `observe`, if set, sees every full result before its sample is dropped.
inline SweepReport convergence_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& n_list,
                                     const std::function<void(const ExperimentResult&)>& observe = {}) {
  if (base.norming != NormingChoice::auto_gaussian)
    throw InputError("convergence_sweep: norming constants must be recomputed per n (auto-gaussian)");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (!(n_list[i] > n_list[i - 1])) throw InputError("convergence_sweep: n_list must be increasing");
  SweepReport report;
  for (std::size_t n : n_list) {
    ExperimentConfig cfg = base;
    cfg.n = n;
    auto result = run_experiment(cfg);
    if (observe) observe(result);
    SweepPoint pt;
    pt.n = n;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      if (i == 0 || result.rows[i].abs_dev > pt.max_abs_dev) {
        pt.max_abs_dev = result.rows[i].abs_dev;
        pt.std_err = result.rows[i].std_err;
        pt.quad_index = i;
      }
    }
    pt.rows = std::move(result.rows);
    report.points.push_back(std::move(pt));
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV output; +-inf print as inf / -inf.

namespace detail {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

inline void write_estimates_csv(std::ostream& os, const std::vector<EstimateRow>& rows) {
  using detail::fmt_num;
  os << "x2,y2,x1,y1,empirical,std_err,theoretical,abs_dev,dev_in_se\n";
  for (const auto& r : rows) {
    os << fmt_num(r.quad.x2) << ',' << fmt_num(r.quad.y2) << ',' << fmt_num(r.quad.x1) << ',' << fmt_num(r.quad.y1)
       << ',' << fmt_num(r.empirical) << ',' << fmt_num(r.std_err) << ',' << fmt_num(r.theoretical) << ','
       << fmt_num(r.abs_dev) << ',' << fmt_num(r.dev_in_se) << '\n';
  }
}

inline void write_raw_csv(std::ostream& os, const std::vector<ExtremalQuadruple>& sample) {
  using detail::fmt_num;
  os << "replicate,M_eps,m_eps,M,m,s_n,normalized_M_eps,normalized_m_eps,normalized_M,normalized_m\n";
  for (std::size_t r = 0; r < sample.size(); ++r) {
    const auto& q = sample[r];
    os << r << ',' << fmt_num(q.max_eps) << ',' << fmt_num(q.min_eps) << ',' << fmt_num(q.max) << ','
       << fmt_num(q.min) << ',' << q.s_n;
    if (q.normalized) {
      const auto& z = *q.normalized;
      os << ',' << fmt_num(z.max_eps) << ',' << fmt_num(z.min_eps) << ',' << fmt_num(z.max) << ','
         << fmt_num(z.min);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

}  // namespace evlab

#endif  // EVLAB_ENGINE_HPP
