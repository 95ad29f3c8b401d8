#ifndef EVLAB_CONFIG_HPP
#define EVLAB_CONFIG_HPP

/** @file
 * Flat key = value experiment files.
 *
 *   # comment
 *   n = 100000
 *   reps = 20000
 *   seed = 42
 *   workers = 1
 *   correlation.kind = ar1          # iid | ar1 | power_decay | log_decay
 *   correlation.phi = 0.5
 *   correlation.sampler = auto      # auto | iid | ar1 | circulant
 *   missingness.kind = exchangeable # iid_bernoulli | exchangeable | markov | pattern
 *   p_distribution.kind = uniform   # point_mass | uniform | beta | discrete
 *   quad = 0, 1, 1, 0               # x2, y2, x1, y1; repeatable
 *
 * Unknown keys are errors, except `manifest.*`, which manifests add on top
 * of the echoed configuration. serialize_config writes every field at full
 * precision, so parse(serialize(c)) == c.
 */

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "evlab/engine.hpp"
#include "evlab/error.hpp"

namespace evlab {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(field, "expected a number, got an empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || std::isnan(v))
    throw ConfigError(field, "expected a number, got '" + t + "'");
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-' || t[0] == '+') throw ConfigError(field, "expected a nonnegative integer, got '" + t + "'");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(field, "expected a nonnegative integer, got '" + t + "'");
  return static_cast<std::uint64_t>(v);
}

inline std::string fmt_exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline TailTable parse_table(const std::string& field, const std::string& text) {
  TailTable t;
  for (const auto& item : split(text, ',')) {
    const auto kv = split(item, ':');
    if (kv.size() != 2) throw ConfigError(field, "expected 'level:value' pairs separated by commas");
    t.points.emplace_back(parse_double(field, kv[0]), parse_double(field, kv[1]));
  }
  return t;
}

inline std::string format_table(const TailTable& t) {
  std::string s;
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    if (i) s += ", ";
    s += fmt_exact(t.points[i].first) + ":" + fmt_exact(t.points[i].second);
  }
  return s;
}

inline std::vector<std::uint8_t> parse_pattern_line(const std::string& field, const std::string& text) {
  std::vector<std::uint8_t> line;
  for (char ch : text) {
    if (ch == '0' || ch == '1') line.push_back(static_cast<std::uint8_t>(ch - '0'));
    else if (!std::isspace(static_cast<unsigned char>(ch))) throw ConfigError(field, "patterns may contain only 0 and 1");
  }
  if (line.empty()) throw ConfigError(field, "empty pattern");
  return line;
}

/// key -> values in file order, each with its line number.
struct RawConfig {
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, std::vector<Entry>> entries;

  const Entry* single(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    if (it->second.size() > 1)
      throw ConfigError(key, "given more than once (line " + std::to_string(it->second[1].line) + ")");
    return &it->second.front();
  }
  std::optional<std::string> get(const std::string& key) const {
    const Entry* e = single(key);
    return e ? std::optional<std::string>(e->value) : std::nullopt;
  }
  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError(key, "required key is missing");
    return *v;
  }
  double number(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? parse_double(key, *v) : fallback;
  }
  double required_number(const std::string& key) const { return parse_double(key, require(key)); }
};

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "n", "reps", "seed", "workers", "quad",
      "correlation.kind", "correlation.phi", "correlation.c", "correlation.alpha", "correlation.sampler",
      "missingness.kind", "missingness.p", "missingness.p01", "missingness.p10", "missingness.pattern",
      "missingness.pattern_file",
      "p_distribution.kind", "p_distribution.p", "p_distribution.a", "p_distribution.b", "p_distribution.alpha",
      "p_distribution.beta", "p_distribution.atoms",
      "norming.kind", "norming.a", "norming.b", "norming.c", "norming.d", "norming.convention",
      "limit.family", "limit.g_table", "limit.h_table"};
  return keys;
}

inline RawConfig read_raw(std::istream& in) {
  RawConfig raw;
  std::string line;
  std::size_t number = 0;
  const auto& keys = known_keys();
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.rfind("manifest.", 0) == 0) continue;
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(key, "unknown key (line " + std::to_string(number) + ")");
    raw.entries[key].push_back({value, number});
  }
  return raw;
}

inline PDistribution parse_p_distribution(const RawConfig& raw) {
  const std::string kind = raw.require("p_distribution.kind");
  try {
    if (kind == "point_mass") return PDistribution::point_mass(raw.required_number("p_distribution.p"));
    if (kind == "uniform")
      return PDistribution::uniform(raw.number("p_distribution.a", 0.0), raw.number("p_distribution.b", 1.0));
    if (kind == "beta")
      return PDistribution::beta_distribution(raw.required_number("p_distribution.alpha"),
                                              raw.required_number("p_distribution.beta"));
    if (kind == "discrete") {
      std::vector<PDistribution::Atom> atoms;
      for (const auto& item : split(raw.require("p_distribution.atoms"), ',')) {
        const auto kv = split(item, ':');
        if (kv.size() != 2) throw ConfigError("p_distribution.atoms", "expected 'value:weight' pairs");
        atoms.push_back({parse_double("p_distribution.atoms", kv[0]), parse_double("p_distribution.atoms", kv[1])});
      }
      return PDistribution::discrete(std::move(atoms));
    }
  } catch (const InputError& e) {
    throw ConfigError("p_distribution", e.what());
  }
  throw ConfigError("p_distribution.kind", "unknown kind '" + kind + "'");
}

}  // namespace detail

/// Parse a configuration. Relative pattern files resolve against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  using detail::parse_double;
  using detail::parse_unsigned;
  const detail::RawConfig raw = detail::read_raw(in);
  ExperimentConfig cfg;

  cfg.n = parse_unsigned("n", raw.require("n"));
  if (cfg.n < 3) throw ConfigError("n", "must be at least 3");
  cfg.reps = parse_unsigned("reps", raw.require("reps"));
  if (cfg.reps < 1) throw ConfigError("reps", "must be at least 1");
  if (auto v = raw.get("seed")) cfg.base_seed = parse_unsigned("seed", *v);
  if (auto v = raw.get("workers")) {
    const auto w = parse_unsigned("workers", *v);
    if (w < 1 || w > 4096) throw ConfigError("workers", "must lie in [1, 4096]");
    cfg.workers = static_cast<unsigned>(w);
  }

  {
    const std::string kind = raw.get("correlation.kind").value_or("iid");
    try {
      if (kind == "iid") cfg.correlation = CorrelationModel::iid();
      else if (kind == "ar1") cfg.correlation = CorrelationModel::ar1(raw.required_number("correlation.phi"));
      else if (kind == "power_decay")
        cfg.correlation =
            CorrelationModel::power_decay(raw.required_number("correlation.c"), raw.required_number("correlation.alpha"));
      else if (kind == "log_decay") cfg.correlation = CorrelationModel::log_decay(raw.required_number("correlation.c"));
      else throw ConfigError("correlation.kind", "unknown kind '" + kind + "'");
    } catch (const InputError& e) {
      throw ConfigError("correlation", e.what());
    }
    const std::string sampler = raw.get("correlation.sampler").value_or("auto");
    if (sampler == "auto") cfg.sampler = SamplerKind::automatic;
    else if (sampler == "iid") cfg.sampler = SamplerKind::iid;
    else if (sampler == "ar1") cfg.sampler = SamplerKind::ar1;
    else if (sampler == "circulant") cfg.sampler = SamplerKind::circulant;
    else throw ConfigError("correlation.sampler", "unknown sampler '" + sampler + "'");
  }

  {
    const std::string kind = raw.get("missingness.kind").value_or("iid_bernoulli");
    try {
      if (kind == "iid_bernoulli") {
        cfg.missingness = MissingnessModel::iid_bernoulli(raw.number("missingness.p", 1.0));
      } else if (kind == "exchangeable") {
        cfg.missingness = MissingnessModel::exchangeable(detail::parse_p_distribution(raw));
      } else if (kind == "markov") {
        cfg.missingness =
            MissingnessModel::two_state_markov(raw.required_number("missingness.p01"), raw.required_number("missingness.p10"));
      } else if (kind == "pattern") {
        std::vector<std::vector<std::uint8_t>> patterns;
        if (auto it = raw.entries.find("missingness.pattern"); it != raw.entries.end())
          for (const auto& e : it->second) patterns.push_back(detail::parse_pattern_line("missingness.pattern", e.value));
        if (auto file = raw.get("missingness.pattern_file")) {
          std::filesystem::path path(*file);
          if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
          std::ifstream pf(path);
          if (!pf) throw ConfigError("missingness.pattern_file", "cannot open '" + path.string() + "'");
          for (auto& line : read_patterns(pf, path.string())) patterns.push_back(std::move(line));
        }
        if (patterns.empty()) throw ConfigError("missingness.pattern", "pattern missingness needs at least one pattern");
        cfg.missingness = MissingnessModel::deterministic_pattern(std::move(patterns));
      } else {
        throw ConfigError("missingness.kind", "unknown kind '" + kind + "'");
      }
    } catch (const InputError& e) {
      throw ConfigError("missingness", e.what());
    }
    if (kind != "exchangeable" && raw.get("p_distribution.kind"))
      throw ConfigError("p_distribution.kind", "only used with missingness.kind = exchangeable");
  }

  {
    const std::string kind = raw.get("norming.kind").value_or("auto_gaussian");
    if (kind == "auto_gaussian") {
      cfg.norming = NormingChoice::auto_gaussian;
    } else if (kind == "explicit") {
      cfg.norming = NormingChoice::explicit_constants;
      NormingConstants nc;
      nc.a = raw.required_number("norming.a");
      nc.b = raw.required_number("norming.b");
      nc.c = raw.required_number("norming.c");
      nc.d = raw.required_number("norming.d");
      const std::string conv = raw.get("norming.convention").value_or("gaussian_symmetric");
      if (conv == "gaussian_symmetric") nc.convention = Convention::gaussian_symmetric;
      else if (conv == "general_linear") nc.convention = Convention::general_linear;
      else throw ConfigError("norming.convention", "unknown convention '" + conv + "'");
      nc.n = cfg.n;
      try {
        nc.validate();
      } catch (const InputError& e) {
        throw ConfigError("norming", e.what());
      }
      cfg.explicit_norming = nc;
    } else {
      throw ConfigError("norming.kind", "unknown kind '" + kind + "'");
    }
  }

  {
    const std::string family = raw.get("limit.family").value_or("gumbel");
    if (family == "gumbel") {
      cfg.limit = LimitSpec::gumbel();
    } else if (family == "custom") {
      try {
        cfg.limit = LimitSpec::custom(detail::parse_table("limit.g_table", raw.require("limit.g_table")),
                                      detail::parse_table("limit.h_table", raw.require("limit.h_table")));
      } catch (const InputError& e) {
        throw ConfigError("limit", e.what());
      }
    } else {
      throw ConfigError("limit.family", "unknown family '" + family + "'");
    }
  }

  if (auto it = raw.entries.find("quad"); it != raw.entries.end()) {
    for (const auto& e : it->second) {
      const std::string field = "quad (line " + std::to_string(e.line) + ")";
      const auto parts = detail::split(e.value, ',');
      if (parts.size() != 4) throw ConfigError(field, "expected four levels x2, y2, x1, y1");
      ThresholdQuad q{parse_double(field, parts[0]), parse_double(field, parts[1]), parse_double(field, parts[2]),
                      parse_double(field, parts[3])};
      try {
        q.validate();
      } catch (const InputError& err) {
        throw ConfigError(field, err.what());
      }
      cfg.thresholds.push_back(q);
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

/// Canonical text of a configuration; patterns are written inline.
inline void serialize_config(std::ostream& os, const ExperimentConfig& cfg) {
  using detail::fmt_exact;
  os << "n = " << cfg.n << '\n';
  os << "reps = " << cfg.reps << '\n';
  os << "seed = " << cfg.base_seed << '\n';
  os << "workers = " << cfg.workers << '\n';

  const auto& c = cfg.correlation;
  switch (c.kind) {
    case CorrelationModel::Kind::iid: os << "correlation.kind = iid\n"; break;
    case CorrelationModel::Kind::ar1: os << "correlation.kind = ar1\ncorrelation.phi = " << fmt_exact(c.phi) << '\n'; break;
    case CorrelationModel::Kind::power_decay:
      os << "correlation.kind = power_decay\ncorrelation.c = " << fmt_exact(c.c) << "\ncorrelation.alpha = "
         << fmt_exact(c.alpha) << '\n';
      break;
    case CorrelationModel::Kind::log_decay:
      os << "correlation.kind = log_decay\ncorrelation.c = " << fmt_exact(c.c) << '\n';
      break;
  }
  os << "correlation.sampler = " << to_string(cfg.sampler) << '\n';

  const auto& m = cfg.missingness;
  switch (m.kind) {
    case MissingnessModel::Kind::iid_bernoulli:
      os << "missingness.kind = iid_bernoulli\nmissingness.p = " << fmt_exact(m.p) << '\n';
      break;
    case MissingnessModel::Kind::two_state_markov:
      os << "missingness.kind = markov\nmissingness.p01 = " << fmt_exact(m.p01) << "\nmissingness.p10 = "
         << fmt_exact(m.p10) << '\n';
      break;
    case MissingnessModel::Kind::deterministic_pattern:
      os << "missingness.kind = pattern\n";
      for (const auto& pat : m.patterns) {
        os << "missingness.pattern = ";
        for (auto v : pat) os << static_cast<char>('0' + v);
        os << '\n';
      }
      break;
    case MissingnessModel::Kind::exchangeable: {
      os << "missingness.kind = exchangeable\n";
      const auto& pd = m.mixing;
      switch (pd.kind) {
        case PDistribution::Kind::point_mass:
          os << "p_distribution.kind = point_mass\np_distribution.p = " << fmt_exact(pd.p) << '\n';
          break;
        case PDistribution::Kind::uniform:
          os << "p_distribution.kind = uniform\np_distribution.a = " << fmt_exact(pd.lower)
             << "\np_distribution.b = " << fmt_exact(pd.upper) << '\n';
          break;
        case PDistribution::Kind::beta:
          os << "p_distribution.kind = beta\np_distribution.alpha = " << fmt_exact(pd.alpha)
             << "\np_distribution.beta = " << fmt_exact(pd.beta) << '\n';
          break;
        case PDistribution::Kind::discrete:
          os << "p_distribution.kind = discrete\np_distribution.atoms = ";
          for (std::size_t i = 0; i < pd.atoms.size(); ++i)
            os << (i ? ", " : "") << fmt_exact(pd.atoms[i].value) << ':' << fmt_exact(pd.atoms[i].weight);
          os << '\n';
          break;
      }
      break;
    }
  }

  if (cfg.norming == NormingChoice::auto_gaussian) {
    os << "norming.kind = auto_gaussian\n";
  } else {
    const auto& nc = cfg.explicit_norming;
    os << "norming.kind = explicit\nnorming.a = " << fmt_exact(nc.a) << "\nnorming.b = " << fmt_exact(nc.b)
       << "\nnorming.c = " << fmt_exact(nc.c) << "\nnorming.d = " << fmt_exact(nc.d) << "\nnorming.convention = "
       << (nc.convention == Convention::gaussian_symmetric ? "gaussian_symmetric" : "general_linear") << '\n';
  }

  if (cfg.limit.family() == LimitSpec::Family::gumbel) {
    os << "limit.family = gumbel\n";
  } else {
    os << "limit.family = custom\nlimit.g_table = " << detail::format_table(cfg.limit.g_table())
       << "\nlimit.h_table = " << detail::format_table(cfg.limit.h_table()) << '\n';
  }

  for (const auto& q : cfg.thresholds)
    os << "quad = " << fmt_exact(q.x2) << ", " << fmt_exact(q.y2) << ", " << fmt_exact(q.x1) << ", "
       << fmt_exact(q.y1) << '\n';
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  serialize_config(os, cfg);
  return os.str();
}

}  // namespace evlab

#endif  // EVLAB_CONFIG_HPP
