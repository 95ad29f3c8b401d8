#ifndef EVLAB_MISSING_HPP
#define EVLAB_MISSING_HPP

/** @file
 * Observation indicators eps_1..eps_n (eps_i = 1 when X_i is observed),
 * the law of the limiting observed fraction P, and a Monte Carlo estimate of
 * the Ky Fan distance d(S_n/n, P) = inf{e : P(|S_n/n - P| > e) < e}.
 */

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evlab/error.hpp"
#include "evlab/rng.hpp"

namespace evlab {

/// Law of the observed fraction P on [0, 1].
struct PDistribution {
  enum class Kind { point_mass, uniform, beta, discrete };

  struct Atom {
    double value = 0.0;
    double weight = 0.0;
    friend bool operator==(const Atom&, const Atom&) = default;
  };

  Kind kind = Kind::point_mass;
  double p = 1.0;      ///< point_mass
  double lower = 0.0;  ///< uniform
  double upper = 1.0;  ///< uniform
  double alpha = 1.0;  ///< beta
  double beta = 1.0;   ///< beta
  std::vector<Atom> atoms;

  static PDistribution point_mass(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("point_mass: p must lie in [0, 1]");
    PDistribution d;
    d.kind = Kind::point_mass;
    d.p = p;
    return d;
  }

  static PDistribution uniform(double a, double b) {
    if (!(a >= 0.0 && a < b && b <= 1.0)) throw InputError("uniform: requires 0 <= a < b <= 1");
    PDistribution d;
    d.kind = Kind::uniform;
    d.lower = a;
    d.upper = b;
    return d;
  }

  static PDistribution beta_distribution(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
      throw InputError("beta: shape parameters must be positive");
    PDistribution d;
    d.kind = Kind::beta;
    d.alpha = alpha;
    d.beta = beta;
    return d;
  }

  static PDistribution discrete(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InputError("discrete: at least one atom is required");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!(a.value >= 0.0 && a.value <= 1.0)) throw InputError("discrete: atom values must lie in [0, 1]");
      if (!(a.weight >= 0.0)) throw InputError("discrete: weights must be nonnegative");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("discrete: weights must sum to 1");
    PDistribution d;
    d.kind = Kind::discrete;
    d.atoms = std::move(atoms);
    return d;
  }

  bool is_degenerate() const noexcept {
    return kind == Kind::point_mass || (kind == Kind::discrete && atoms.size() == 1);
  }

  double mean() const {
    switch (kind) {
      case Kind::point_mass: return p;
      case Kind::uniform: return 0.5 * (lower + upper);
      case Kind::beta: return alpha / (alpha + beta);
      case Kind::discrete: {
        double m = 0.0;
        for (const auto& a : atoms) m += a.value * a.weight;
        return m;
      }
    }
    return p;
  }

  double sample(Engine& engine) const {
    switch (kind) {
      case Kind::point_mass: return p;
      case Kind::uniform: return std::uniform_real_distribution<double>(lower, upper)(engine);
      case Kind::beta: {
        const double x = std::gamma_distribution<double>(alpha, 1.0)(engine);
        const double y = std::gamma_distribution<double>(beta, 1.0)(engine);
        return x + y > 0.0 ? x / (x + y) : 0.5;
      }
      case Kind::discrete: {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
        double acc = 0.0;
        for (const auto& a : atoms) {
          acc += a.weight;
          if (u < acc) return a.value;
        }
        return atoms.back().value;
      }
    }
    return p;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::point_mass: os << "point(" << p << ")"; break;
      case Kind::uniform: os << "uniform(" << lower << ", " << upper << ")"; break;
      case Kind::beta: os << "beta(" << alpha << ", " << beta << ")"; break;
      case Kind::discrete:
        os << "discrete(";
        for (std::size_t i = 0; i < atoms.size(); ++i) os << (i ? ", " : "") << atoms[i].value << ':' << atoms[i].weight;
        os << ")";
        break;
    }
    return os.str();
  }

  friend bool operator==(const PDistribution&, const PDistribution&) = default;
};

/// Mechanism generating the indicator sequence. Always independent of the path.
struct MissingnessModel {
  enum class Kind { iid_bernoulli, exchangeable, two_state_markov, deterministic_pattern };

  Kind kind = Kind::iid_bernoulli;
  double p = 1.0;                 ///< iid_bernoulli
  PDistribution mixing;           ///< exchangeable: P drawn once per replicate
  double p01 = 0.0;               ///< markov: P(unobserved -> observed)
  double p10 = 0.0;               ///< markov: P(observed -> unobserved)
  std::vector<std::vector<std::uint8_t>> patterns;  ///< replicate r uses patterns[r % size]

  static MissingnessModel iid_bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("iid_bernoulli: p must lie in [0, 1]");
    MissingnessModel m;
    m.kind = Kind::iid_bernoulli;
    m.p = p;
    return m;
  }

  static MissingnessModel exchangeable(PDistribution pd) {
    MissingnessModel m;
    m.kind = Kind::exchangeable;
    m.mixing = std::move(pd);
    return m;
  }

  static MissingnessModel two_state_markov(double p01, double p10) {
    if (!(p01 >= 0.0 && p01 <= 1.0 && p10 >= 0.0 && p10 <= 1.0))
      throw InputError("markov: transition probabilities must lie in [0, 1]");
    if (!(p01 + p10 > 0.0)) throw InputError("markov: chain must be irreducible (p01 + p10 > 0)");
    MissingnessModel m;
    m.kind = Kind::two_state_markov;
    m.p01 = p01;
    m.p10 = p10;
    return m;
  }

  static MissingnessModel deterministic_pattern(std::vector<std::vector<std::uint8_t>> patterns) {
    if (patterns.empty()) throw InputError("pattern: at least one pattern is required");
    for (const auto& pat : patterns) {
      if (pat.empty()) throw InputError("pattern: patterns must be non-empty");
      for (auto v : pat)
        if (v > 1) throw InputError("pattern: entries must be 0 or 1");
    }
    MissingnessModel m;
    m.kind = Kind::deterministic_pattern;
    m.patterns = std::move(patterns);
    return m;
  }

  /// Stationary observed probability p01 / (p01 + p10).
  double stationary_probability() const { return p01 / (p01 + p10); }

  /// Law of P used for limit-law comparisons. Constant-fraction mechanisms
  /// map to a point mass; patterns to the mixture of their observed fractions
  /// over the first n entries.
  PDistribution limit_distribution(std::size_t n) const {
    switch (kind) {
      case Kind::iid_bernoulli: return PDistribution::point_mass(p);
      case Kind::exchangeable: return mixing;
      case Kind::two_state_markov: return PDistribution::point_mass(stationary_probability());
      case Kind::deterministic_pattern: {
        std::vector<PDistribution::Atom> atoms;
        const double w = 1.0 / static_cast<double>(patterns.size());
        for (const auto& pat : patterns) {
          const std::size_t len = std::min(n, pat.size());
          const double frac = static_cast<double>(std::accumulate(pat.begin(), pat.begin() + len, 0u)) /
                              static_cast<double>(len);
          atoms.push_back({frac, w});
        }
        double total = 0.0;
        for (const auto& a : atoms) total += a.weight;
        atoms.back().weight += 1.0 - total;
        return PDistribution::discrete(std::move(atoms));
      }
    }
    return PDistribution::point_mass(p);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::iid_bernoulli: os << "iid_bernoulli(" << p << ")"; break;
      case Kind::exchangeable: os << "exchangeable(" << mixing.describe() << ")"; break;
      case Kind::two_state_markov: os << "markov(p01=" << p01 << ", p10=" << p10 << ")"; break;
      case Kind::deterministic_pattern: os << "pattern(" << patterns.size() << " lines)"; break;
    }
    return os.str();
  }

  friend bool operator==(const MissingnessModel&, const MissingnessModel&) = default;
};

/// One replicate's indicators, with S_n and (for exchangeable) the drawn P.
struct IndicatorDraw {
  std::vector<std::uint8_t> indicators;
  std::size_t s_n = 0;
  std::optional<double> realized_p;
};

/// Draw into an existing buffer (reused across replicates by the engine).
inline void draw_indicators_into(const MissingnessModel& model, std::size_t n, const SeedInfo& seed,
                                 IndicatorDraw& draw) {
  if (n == 0) throw InputError("draw_indicators: n must be positive");
  draw.indicators.resize(n);
  draw.realized_p.reset();
  auto& eps = draw.indicators;
  Engine engine = make_engine(seed, Stream::indicators);

  switch (model.kind) {
    case MissingnessModel::Kind::iid_bernoulli: {
      std::bernoulli_distribution coin(model.p);
      for (auto& e : eps) e = coin(engine) ? 1 : 0;
      break;
    }
    case MissingnessModel::Kind::exchangeable: {
      const double p = model.mixing.sample(engine);
      draw.realized_p = p;
      std::bernoulli_distribution coin(p);
      for (auto& e : eps) e = coin(engine) ? 1 : 0;
      break;
    }
    case MissingnessModel::Kind::two_state_markov: {
      std::bernoulli_distribution start(model.stationary_probability());
      std::bernoulli_distribution to_observed(model.p01);
      std::bernoulli_distribution to_missing(model.p10);
      std::uint8_t state = start(engine) ? 1 : 0;
      eps[0] = state;
      for (std::size_t i = 1; i < n; ++i) {
        if (state == 1)
          state = to_missing(engine) ? 0 : 1;
        else
          state = to_observed(engine) ? 1 : 0;
        eps[i] = state;
      }
      break;
    }
    case MissingnessModel::Kind::deterministic_pattern: {
      const auto& pat = model.patterns[seed.replicate % model.patterns.size()];
      if (pat.size() < n)
        throw InputError("draw_indicators: pattern has " + std::to_string(pat.size()) + " entries, need " +
                         std::to_string(n));
      std::copy_n(pat.begin(), n, eps.begin());
      break;
    }
  }
  draw.s_n = static_cast<std::size_t>(std::count(eps.begin(), eps.end(), std::uint8_t{1}));
}

inline IndicatorDraw draw_indicators(const MissingnessModel& model, std::size_t n, const SeedInfo& seed) {
  IndicatorDraw draw;
  draw_indicators_into(model, n, seed, draw);
  return draw;
}

/// Reference value of P for replicate `replicate`: the drawn P when there is
/// one, the constant limit fraction for iid/Markov, and the fraction of ones
/// in the full pattern line for patterns.
inline double reference_fraction(const MissingnessModel& model, const IndicatorDraw& draw, std::uint64_t replicate) {
  if (draw.realized_p) return *draw.realized_p;
  switch (model.kind) {
    case MissingnessModel::Kind::iid_bernoulli: return model.p;
    case MissingnessModel::Kind::two_state_markov: return model.stationary_probability();
    case MissingnessModel::Kind::exchangeable: return model.mixing.mean();
    case MissingnessModel::Kind::deterministic_pattern: {
      const auto& pat = model.patterns[replicate % model.patterns.size()];
      return static_cast<double>(std::accumulate(pat.begin(), pat.end(), 0u)) / static_cast<double>(pat.size());
    }
  }
  return 0.0;
}

/**
 * Monte Carlo estimate of the Ky Fan distance between S_n/n and P.
 *
 * Over `reps` replicates (seeds (base_seed, r)), returns the smallest
 * e on the grid {0.001, 0.002, ..., 1} with empirical P(|S_n/n - P| > e) < e.
 */
inline double kyfan_estimate(const MissingnessModel& model, std::size_t n, std::size_t reps, std::uint64_t base_seed) {
  if (reps < 100) throw InputError("kyfan_estimate: reps must be at least 100");
  std::vector<double> gaps;
  gaps.reserve(reps);
  IndicatorDraw draw;
  for (std::size_t r = 0; r < reps; ++r) {
    const SeedInfo seed{base_seed, r};
    draw_indicators_into(model, n, seed, draw);
    const double reference = reference_fraction(model, draw, r);
    gaps.push_back(std::abs(static_cast<double>(draw.s_n) / static_cast<double>(n) - reference));
  }
  std::sort(gaps.begin(), gaps.end());
  const double total = static_cast<double>(reps);
  for (int k = 1; k <= 1000; ++k) {
    const double eps = k / 1000.0;
    const auto above = static_cast<double>(gaps.end() - std::upper_bound(gaps.begin(), gaps.end(), eps));
    if (above / total < eps) return eps;
  }
  return 1.0;
}

/// Patterns of 0/1 characters, one replicate pattern per line. Blank lines
/// and whitespace are ignored; any other character is an error.
inline std::vector<std::vector<std::uint8_t>> read_patterns(std::istream& in, const std::string& source = "patterns") {
  std::vector<std::vector<std::uint8_t>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::uint8_t> pat;
    for (char ch : line) {
      if (ch == '0' || ch == '1')
        pat.push_back(static_cast<std::uint8_t>(ch - '0'));
      else if (!std::isspace(static_cast<unsigned char>(ch)))
        throw InputError(source + ":" + std::to_string(lineno) + ": unexpected character in pattern");
    }
    if (!pat.empty()) out.push_back(std::move(pat));
  }
  if (out.empty()) throw InputError(source + ": no patterns found");
  return out;
}

inline std::vector<std::vector<std::uint8_t>> load_patterns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pattern file " + path);
  return read_patterns(in, path);
}

}  // namespace evlab

#endif  // EVLAB_MISSING_HPP
