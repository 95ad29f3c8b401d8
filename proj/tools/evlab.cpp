// evlab: command-line front end.
//
//   evlab simulate --config FILE [--seed S] [--n N] [--reps R] [--workers W] [--out DIR] [--dump-raw]
//   evlab limit --pd uniform:0,1 --quad 0,1,1,0 [--quad ...] [--out FILE]
//   evlab check --correlation ar1:0.9 [--p 2] [--out FILE]
//
// Exit codes: 0 ok, 1 usage, 2 configuration, 3 generation, 4 I/O.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evlab/evlab.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { ok = 0, usage = 1, config_error = 2, generation_error = 3, io_error = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// "kind" or "kind:a,b,..."
std::pair<std::string, std::vector<double>> split_spec(const std::string& field, const std::string& spec) {
  const auto colon = spec.find(':');
  std::string kind = evlab::detail::trim(spec.substr(0, colon));
  std::vector<double> args;
  if (colon != std::string::npos)
    for (const auto& part : evlab::detail::split(std::string_view(spec).substr(colon + 1), ','))
      args.push_back(evlab::detail::parse_double(field, part));
  return {kind, args};
}

void expect_args(const std::string& field, const std::vector<double>& args, std::size_t count) {
  if (args.size() != count)
    throw evlab::ConfigError(field, "expected " + std::to_string(count) + " parameter(s), got " +
                                        std::to_string(args.size()));
}

evlab::PDistribution parse_pd(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = evlab::detail::trim(spec.substr(0, colon));
  try {
    if (kind == "discrete") {
      if (colon == std::string::npos) throw evlab::ConfigError("--pd", "discrete needs value@weight atoms");
      std::vector<evlab::PDistribution::Atom> atoms;
      for (const auto& item : evlab::detail::split(std::string_view(spec).substr(colon + 1), ',')) {
        const auto vw = evlab::detail::split(item, '@');
        if (vw.size() != 2) throw evlab::ConfigError("--pd", "expected value@weight, got '" + item + "'");
        atoms.push_back({evlab::detail::parse_double("--pd", vw[0]), evlab::detail::parse_double("--pd", vw[1])});
      }
      return evlab::PDistribution::discrete(std::move(atoms));
    }
    auto [k, args] = split_spec("--pd", spec);
    if (k == "point_mass") {
      expect_args("--pd", args, 1);
      return evlab::PDistribution::point_mass(args[0]);
    }
    if (k == "uniform") {
      if (args.empty()) return evlab::PDistribution::uniform(0.0, 1.0);
      expect_args("--pd", args, 2);
      return evlab::PDistribution::uniform(args[0], args[1]);
    }
    if (k == "beta") {
      expect_args("--pd", args, 2);
      return evlab::PDistribution::beta_distribution(args[0], args[1]);
    }
  } catch (const evlab::InputError& e) {
    throw evlab::ConfigError("--pd", e.what());
  }
  throw evlab::ConfigError("--pd", "unknown distribution '" + kind + "'");
}

evlab::CorrelationModel parse_correlation(const std::string& spec) {
  auto [kind, args] = split_spec("--correlation", spec);
  try {
    if (kind == "iid") {
      expect_args("--correlation", args, 0);
      return evlab::CorrelationModel::iid();
    }
    if (kind == "ar1") {
      expect_args("--correlation", args, 1);
      return evlab::CorrelationModel::ar1(args[0]);
    }
    if (kind == "power_decay") {
      expect_args("--correlation", args, 2);
      return evlab::CorrelationModel::power_decay(args[0], args[1]);
    }
    if (kind == "log_decay") {
      expect_args("--correlation", args, 1);
      return evlab::CorrelationModel::log_decay(args[0]);
    }
  } catch (const evlab::InputError& e) {
    throw evlab::ConfigError("--correlation", e.what());
  }
  throw evlab::ConfigError("--correlation", "unknown model '" + kind + "'");
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> v;
  for (const auto& part : evlab::detail::split(text, ',')) v.push_back(evlab::detail::parse_double(field, part));
  return v;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::size_t> reps;
  std::optional<unsigned> workers;
  std::string out = ".";
  bool dump_raw = false;
};

int cmd_simulate(const SimulateArgs& args) {
  evlab::ExperimentConfig cfg = evlab::load_config(args.config);
  if (args.seed) cfg.base_seed = *args.seed;
  if (args.n) cfg.n = *args.n;
  if (args.reps) cfg.reps = *args.reps;
  if (args.workers) cfg.workers = *args.workers;
  if (cfg.n < 3) throw evlab::ConfigError("n", "must be at least 3");
  if (cfg.reps < 1) throw evlab::ConfigError("reps", "must be at least 1");
  if (cfg.workers < 1) throw evlab::ConfigError("workers", "must be at least 1");
  if (cfg.norming == evlab::NormingChoice::explicit_constants) cfg.explicit_norming.n = cfg.n;

  const std::string started = utc_now();
  const evlab::ExperimentResult result = evlab::run_experiment(cfg);

  const fs::path out(args.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());

  const fs::path estimates = out / "estimates.csv";
  const fs::path summary = out / "summary.json";
  const fs::path manifest = out / "manifest.cfg";
  const fs::path raw = out / "raw.csv";
  const fs::path path0 = out / "path_r0.csv";

  {
    std::ostringstream os;
    evlab::write_estimates_csv(os, result.rows);
    write_file(estimates, os.str());
  }
  if (args.dump_raw) {
    std::ostringstream os;
    evlab::write_raw_csv(os, result.sample);
    write_file(raw, os.str());
    // first replicate's path, one value per line
    const evlab::PathSampler sampler(cfg.correlation, cfg.n, cfg.sampler);
    const auto path = sampler.sample(evlab::SeedInfo{cfg.base_seed, 0});
    std::ostringstream ps;
    for (double v : path.values) ps << evlab::detail::fmt_exact(v) << '\n';
    write_file(path0, ps.str());
  }

  const std::string config_text = evlab::serialize_config(cfg);
  {
    std::ostringstream os;
    os << "# run manifest; reproduce with: evlab simulate --config " << manifest.filename().string() << '\n';
    os << config_text;
    os << "manifest.version = " << kVersion << '\n';
    os << "manifest.started = " << started << '\n';
    os << "manifest.finished = " << utc_now() << '\n';
    os << "manifest.estimates = " << estimates.string() << '\n';
    os << "manifest.summary = " << summary.string() << '\n';
    if (args.dump_raw) os << "manifest.raw = " << raw.string() << '\n';
    write_file(manifest, os.str());
  }
  {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["config"] = config_text;
    j["base_seed"] = cfg.base_seed;
    j["n"] = cfg.n;
    j["reps"] = cfg.reps;
    j["workers"] = cfg.workers;
    j["correlation"] = cfg.correlation.describe();
    j["missingness"] = cfg.missingness.describe();
    j["comparator"] = result.comparator.describe();
    j["norming"] = {{"a", result.norming.a}, {"b", result.norming.b}, {"c", result.norming.c},
                    {"d", result.norming.d}, {"convention", evlab::to_string(result.norming.convention)}};
    j["empty_observation_count"] = result.empty_observation_count;
    j["clipped_eigenvalues"] = result.clipped_eigenvalues;
    j["wall_seconds"] = result.wall_seconds;
    j["started"] = started;
    j["outputs"] = {{"estimates", estimates.string()}, {"manifest", manifest.string()}};
    if (args.dump_raw) j["outputs"]["raw"] = raw.string();
    write_file(summary, j.dump(2) + "\n");
  }
  if (result.clipped_eigenvalues > 0)
    std::fprintf(stderr, "warning: %zu slightly negative circulant eigenvalues clipped to 0\n",
                 result.clipped_eigenvalues);
  std::fprintf(stderr, "wrote %s (%zu rows, %zu replicates with no observations)\n", estimates.c_str(),
               result.rows.size(), result.empty_observation_count);
  return ok;
}

struct LimitArgs {
  std::string pd = "point_mass:1";
  std::vector<std::string> quads;
  std::string x2, y2, x1, y1;
  std::string out;
};

int cmd_limit(const LimitArgs& args) {
  const evlab::PDistribution pd = parse_pd(args.pd);
  const evlab::LimitSpec spec = evlab::LimitSpec::gumbel();

  std::vector<evlab::ThresholdQuad> grid;
  for (const auto& q : args.quads) {
    const auto v = parse_list("--quad", q);
    if (v.size() != 4) throw evlab::ConfigError("--quad", "expected x2,y2,x1,y1, got '" + q + "'");
    grid.push_back({v[0], v[1], v[2], v[3]});
  }
  const bool any_list = !args.x2.empty() || !args.y2.empty() || !args.x1.empty() || !args.y1.empty();
  if (any_list) {
    if (args.x2.empty() || args.y2.empty() || args.x1.empty() || args.y1.empty())
      throw evlab::ConfigError("--x2/--y2/--x1/--y1", "grid lists must be given together");
    for (double x2 : parse_list("--x2", args.x2))
      for (double y2 : parse_list("--y2", args.y2))
        for (double x1 : parse_list("--x1", args.x1))
          for (double y1 : parse_list("--y1", args.y1)) grid.push_back({x2, y2, x1, y1});
  }

  std::ostringstream os;
  os << "x2,y2,x1,y1,value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& q = grid[i];
    try {
      q.validate();
    } catch (const evlab::InputError& e) {
      throw evlab::ConfigError("grid row " + std::to_string(i + 1), e.what());
    }
    using evlab::detail::fmt_num;
    os << fmt_num(q.x2) << ',' << fmt_num(q.y2) << ',' << fmt_num(q.x1) << ',' << fmt_num(q.y1) << ','
       << fmt_num(evlab::joint_limit(spec, q, pd)) << '\n';
  }
  if (args.out.empty()) std::cout << os.str();
  else write_file(args.out, os.str());
  return ok;
}

struct CheckArgs {
  std::string correlation = "iid";
  double p = 2.0;
  std::uint64_t max_n = 1'000'000;
  std::string out;
};

int cmd_check(const CheckArgs& args) {
  const evlab::CorrelationModel model = parse_correlation(args.correlation);
  if (!(args.p > 1.0)) throw evlab::ConfigError("--p", "the Davis exponent must exceed 1");
  if (args.max_n < 100) throw evlab::ConfigError("--max-n", "must be at least 100");
  evlab::CheckOptions opt;
  opt.davis_p = args.p;
  opt.berman_max_n = opt.davis_max_N = opt.dprime_max_n = args.max_n;
  const auto report = evlab::check_conditions(model, opt);
  std::ostringstream os;
  evlab::write_condition_report(os, report);
  if (args.out.empty()) std::cout << os.str();
  else write_file(args.out, os.str());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint extremes of complete and incomplete Gaussian samples"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  simulate->add_option("--config", sim.config, "Experiment file")->required();
  simulate->add_option("--seed", sim.seed, "Override the base seed");
  simulate->add_option("--n", sim.n, "Override the path length");
  simulate->add_option("--reps", sim.reps, "Override the number of replicates");
  simulate->add_option("--workers", sim.workers, "Override the worker count");
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_flag("--dump-raw", sim.dump_raw, "Also write raw quadruples and the first path");

  LimitArgs lim;
  auto* limit = app.add_subcommand("limit", "Evaluate the limit law on a threshold grid");
  limit->add_option("--pd", lim.pd, "point_mass:p | uniform[:a,b] | beta:alpha,beta | discrete:v@w,...")
      ->capture_default_str();
  limit->add_option("--quad", lim.quads, "x2,y2,x1,y1 (repeatable)");
  limit->add_option("--x2", lim.x2, "Comma list; with --y2/--x1/--y1 forms a product grid");
  limit->add_option("--y2", lim.y2);
  limit->add_option("--x1", lim.x1);
  limit->add_option("--y1", lim.y1);
  limit->add_option("--out", lim.out, "Output CSV (default stdout)");

  CheckArgs chk;
  auto* check = app.add_subcommand("check", "Dependence-condition diagnostics");
  check->add_option("--correlation", chk.correlation, "iid | ar1:phi | power_decay:c,alpha | log_decay:c")
      ->capture_default_str();
  check->add_option("--p", chk.p, "Davis exponent")->capture_default_str();
  check->add_option("--max-n", chk.max_n, "Largest n / N on the grid")->capture_default_str();
  check->add_option("--out", chk.out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*limit) return cmd_limit(lim);
    if (*check) return cmd_check(chk);
  } catch (const evlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const evlab::InputError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_error;
  } catch (const evlab::EmbeddingFailure& e) {
    std::fprintf(stderr, "generation failed: %s\n", e.what());
    return generation_error;
  } catch (const evlab::ReplicateError& e) {
    std::fprintf(stderr, "generation failed: %s\n", e.what());
    return generation_error;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return io_error;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return generation_error;
  }
  return usage;
}
