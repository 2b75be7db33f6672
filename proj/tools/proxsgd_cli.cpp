#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "proxsgd/bench.hpp"
#include "proxsgd/io.hpp"
#include "proxsgd/verify.hpp"

namespace fs = std::filesystem;
using namespace proxsgd;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

constexpr const char* kSeedEnv = "PROXSGD_SEED";

struct Options {
  std::string config;
  std::string out = "results";
  std::size_t jobs = 0;
  std::optional<std::uint64_t> seed;
  bool dry_run = false;
  std::string scope = "all";
};

void log(const std::string& msg) { std::cerr << "[proxsgd] " << msg << '\n'; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Seed precedence: --seed, then PROXSGD_SEED, then the config file.
void apply_seed_override(ExperimentSpec& spec, const Options& opt) {
  if (opt.seed) {
    spec.master_seed = *opt.seed;
    return;
  }
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      spec.master_seed = v;
    } catch (const std::exception&) {
      throw ConfigError(0, kSeedEnv, std::string("not an unsigned integer: '") + env + "'");
    }
  }
}

ExperimentSpec resolve_spec(const Options& opt) {
  ExperimentSpec spec = load_config(opt.config);
  apply_seed_override(spec, opt);
  return spec;
}

void write_manifest(const std::string& subcommand, const Options& opt, const ExperimentSpec& spec) {
  const std::string resolved = format_config(spec);
  nlohmann::json manifest = {{"subcommand", subcommand},
                             {"config_path", opt.config},
                             {"config_digest", hex64(fnv1a64(resolved))},
                             {"resolved_config", resolved},
                             {"output_dir", opt.out},
                             {"timestamp", utc_timestamp()}};
  write_atomic(fs::path(opt.out) / "manifest.json", manifest.dump(2) + "\n");
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

void print_rate_table(const RateReport& r) {
  std::printf("%-8s %-12s %-24s %-24s %-12s\n", "T", "tau", "gap_last (se)", "gap_avg (se)", "bound");
  for (const auto& row : r.rows) {
    std::printf("%-8zu %-12s %-24s %-24s %-12s\n", row.T, sci(row.tau).c_str(),
                (sci(row.mean_last) + " (" + sci(row.se_last) + ")").c_str(),
                (sci(row.mean_avg) + " (" + sci(row.se_avg) + ")").c_str(),
                row.bound ? sci(row.bound->total).c_str() : "-");
  }
  if (r.slope_last.valid) {
    std::printf("slope (last) %.4f  95%% CI [%.4f, %.4f]\n", r.slope_last.slope, r.slope_last.ci_low,
                r.slope_last.ci_high);
  }
  if (r.slope_avg.valid) {
    std::printf("slope (avg)  %.4f  95%% CI [%.4f, %.4f]\n", r.slope_avg.slope, r.slope_avg.ci_low,
                r.slope_avg.ci_high);
  }
}

int cmd_run(const Options& opt) {
  const ExperimentSpec spec = resolve_spec(opt);
  if (opt.dry_run) {
    std::cout << format_config(spec);
    return kOk;
  }
  log("running " + to_string(spec.algorithm) + " on " + to_string(spec.problem));
  const RateReport report = run_experiment(spec, opt.jobs);
  const fs::path out(opt.out);
  write_atomic(out / "report.json", to_json(report).dump(2) + "\n");
  write_atomic(out / "cells.csv", cells_csv(report));
  write_atomic(out / "plot.csv", plot_csv(report));
  write_manifest("run", opt, spec);
  for (const auto& c : report.cells) {
    if (c.diverged) log("warning: T=" + std::to_string(c.T) + " trial " + std::to_string(c.trial) + ": " + c.note);
  }
  print_rate_table(report);
  return kOk;
}

int cmd_compare(const Options& opt) {
  const ExperimentSpec spec = resolve_spec(opt);
  if (opt.dry_run) {
    std::cout << format_config(spec);
    return kOk;
  }
  log("comparing last and averaged iterates at T=" + std::to_string(spec.T_grid.back()));
  const ComparisonTable table = compare_last_vs_avg(spec, opt.jobs);
  const fs::path out(opt.out);
  write_atomic(out / "comparison.json", to_json(table).dump(2) + "\n");
  write_atomic(out / "comparison.csv", comparison_csv(table));
  write_manifest("compare", opt, spec);
  if (table.diverged > 0) log("warning: " + std::to_string(table.diverged) + " trials diverged");
  std::printf("%-6s %-12s %-12s %s\n", "trial", "gap_last", "gap_avg", "winner");
  for (const auto& r : table.rows) {
    std::printf("%-6zu %-12s %-12s %s\n", r.trial, sci(r.gap_last).c_str(), sci(r.gap_avg).c_str(),
                r.gap_last < r.gap_avg ? "last" : (r.gap_avg < r.gap_last ? "average" : "tie"));
  }
  std::printf("last iterate wins %zu of %zu\n", table.last_wins, table.rows.size());
  return kOk;
}

int cmd_verify(const Options& opt) {
  const auto scope = parse_verify_scope(opt.scope);
  if (!scope) {
    log("unknown scope '" + opt.scope + "' (alpha, prox, variance, descent, bounds, all)");
    return kUsage;
  }
  std::uint64_t seed = 7;
  if (opt.seed) seed = *opt.seed;
  else if (const char* env = std::getenv(kSeedEnv)) seed = std::stoull(env);
  if (opt.dry_run) {
    std::cout << "scope = " << to_string(*scope) << "\nseed = " << seed << '\n';
    return kOk;
  }
  const VerifyReport report = run_verify(*scope, seed, opt.jobs);
  const fs::path out(opt.out);
  write_atomic(out / "verify.json", to_json(report).dump(2) + "\n");
  for (const auto& c : report.checks) {
    if (!c.pass) {
      log("FAIL " + c.scope + "/" + c.name + " [" + c.cell + "] lhs=" + format_double(c.lhs) +
          " rhs=" + format_double(c.rhs));
    }
  }
  std::printf("%zu checks, %zu failed\n", report.checks.size(), report.failures());
  return report.all_pass() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Last-iterate stochastic proximal gradient experiments"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--jobs", opt.jobs, "Worker threads (0 = hardware parallelism)")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Master seed; overrides PROXSGD_SEED and the config");
    sub->add_flag("--dry-run", opt.dry_run, "Print the resolved configuration and exit");
  };

  auto* run = app.add_subcommand("run", "Run a rate experiment from a config file");
  run->add_option("--config", opt.config, "Config file")->required();
  add_common(run);

  auto* compare = app.add_subcommand("compare", "Compare last and averaged iterates");
  compare->add_option("--config", opt.config, "Config file")->required();
  add_common(compare);

  auto* verify = app.add_subcommand("verify", "Check the invariant grids");
  verify->add_option("--scope", opt.scope, "alpha, prox, variance, descent, bounds or all")->capture_default_str();
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (compare->parsed()) return cmd_compare(opt);
    return cmd_verify(opt);
  } catch (const ConfigError& e) {
    log("config error: " + std::string(e.what()));
    return kUsage;
  } catch (const std::invalid_argument& e) {
    log("invalid configuration: " + std::string(e.what()));
    return kUsage;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kRuntime;
  }
}
