// shms: stepped-shaft weight optimization with Snail Homing and Mating Search.
//
//   shms optimize --config run.ini [--runs N] [--seed K] [--set key=value]...
//   shms oracle   --config run.ini [--set key=value]...
//   shms statics  --config run.ini [--set key=value]...

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "snail/config.hpp"
#include "snail/runner.hpp"

namespace {

using snail::app::RunConfig;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Configuration file (defaults when omitted)");
  cmd->add_option("--set", opts.overrides, "Override one field, e.g. --set algorithm.theta=5e4")
      ->take_last()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmd->add_option("--out", opts.output, "Output directory (overrides output.directory)");
}

RunConfig resolve(const CommonOptions& opts) {
  RunConfig config = opts.config_path.empty() ? RunConfig{} : snail::app::load_config(opts.config_path);
  for (const auto& o : opts.overrides) snail::app::apply_override(config, o);
  if (!opts.output.empty()) config.output_directory = opts.output;
  return config;
}

void list_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) fmt::print("  wrote {}\n", f.string());
}

int run_optimize(const CommonOptions& opts, std::optional<int> runs, std::optional<std::uint64_t> seed) {
  RunConfig config = resolve(opts);
  if (seed) config.algorithm.seed = *seed;
  if (runs) config.runs = *runs;
  const auto out = snail::app::cmd_optimize(config, config.runs);
  const auto& s = out.batch.stats;
  const auto& best = out.batch.runs[s.best_run];
  fmt::print("master seed {}  runs {}  policy {}  deflection {}\n", config.algorithm.seed, s.runs,
             snail::beam::to_string(config.policy.kind), snail::shaft::to_string(config.deflection_mode));
  fmt::print("best  W = {:.4f} lb  d = ({:.4f}, {:.4f}, {:.4f})  feasible = {}\n", best.best_objective,
             best.best_position[0], best.best_position[1], best.best_position[2], best.best_feasible);
  if (s.runs > 1) {
    fmt::print("mean  W = {:.4f} lb  worst W = {:.4f} lb  std = {:.4f}\n", s.mean, s.worst,
               s.standard_deviation);
    fmt::print("feasible runs {}/{}  mean evaluations {:.1f}  mean time {:.3f} s\n", s.feasible_runs,
               s.runs, s.mean_evaluations, s.mean_wall_seconds);
  } else {
    fmt::print("evaluations {}  iterations {}  terminated by {}  time {:.3f} s\n", best.evaluations,
               best.iterations, snail::search::to_string(best.terminated_by), best.wall_seconds);
  }
  list_files(out.files);
  return 0;
}

int run_oracle(const CommonOptions& opts) {
  const RunConfig config = resolve(opts);
  const auto out = snail::app::cmd_oracle(config);
  const auto& r = out.result;
  if (!r.found) {
    fmt::print("oracle found no feasible grid point\n");
    list_files(out.files);
    return 2;
  }
  fmt::print("oracle  W = {:.6f} lb  d = ({:.6f}, {:.6f}, {:.6f})\n", r.best_f, r.best[0], r.best[1],
             r.best[2]);
  fmt::print("resolution {}  levels {}  evaluated {}  time {:.2f} s\n", r.resolution, r.levels,
             r.evaluated, r.seconds);
  list_files(out.files);
  return 0;
}

int run_statics(const CommonOptions& opts) {
  const RunConfig config = resolve(opts);
  const auto setup = snail::app::build_problem(config);
  std::cout << snail::app::statics_report(setup, config);
  list_files(snail::app::cmd_statics_report(config));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stepped transmission shaft weight optimization (SHMS)"};
  app.require_subcommand(1);

  CommonOptions optimize_opts;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  auto* optimize = app.add_subcommand("optimize", "Run one optimization or a seeded batch");
  add_common(optimize, optimize_opts);
  optimize->add_option("--runs", runs, "Number of independent runs")->check(CLI::PositiveNumber);
  optimize->add_option("--seed", seed, "Master seed");

  CommonOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive grid search for the model optimum");
  add_common(oracle, oracle_opts);

  CommonOptions statics_opts;
  auto* statics = app.add_subcommand("statics", "Loads, reactions and moment diagrams");
  add_common(statics, statics_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) return run_optimize(optimize_opts, runs, seed);
    if (*oracle) return run_oracle(oracle_opts);
    if (*statics) return run_statics(statics_opts);
  } catch (const snail::app::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return 3;
  } catch (const snail::app::StaticsError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
