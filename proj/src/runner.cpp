#include "snail/runner.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace snail::app {

namespace {

using beam::Plane;
using beam::PowerLevel;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << content;
}

std::filesystem::path prepare_directory(const RunConfig& config) {
  std::filesystem::path dir(config.output_directory);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string residual_listing(const beam::ShaftStatics& statics) {
  std::string out;
  for (PowerLevel level : {PowerLevel::max, PowerLevel::min}) {
    for (Plane plane : {Plane::vertical, Plane::horizontal}) {
      const auto& c = statics.load_case(plane, level);
      out += fmt::format("  {} {}: sum F = {:.3e} lb, sum M(A) = {:.3e} lb*in, sum M(B) = {:.3e} lb*in\n",
                         beam::to_string(level), beam::to_string(plane), c.force_residual(),
                         c.moment_residual_about(c.supports[0]),
                         c.moment_residual_about(c.supports[1]));
    }
  }
  return out;
}

}  // namespace

ShaftSetup build_problem(const RunConfig& config) {
  config.validate();
  beam::ShaftLayout layout = config.layout;
  layout.length = config.spec.total_length();
  beam::ShaftStatics statics(layout);
  if (statics.max_equilibrium_residual() > kEquilibriumTolerance) {
    throw StaticsError("statics equilibrium check failed:\n" + residual_listing(statics));
  }

  const auto bounds = config.spec.section_bounds();
  std::array<beam::SectionMoments, 3> moments;
  for (int i = 0; i < 3; ++i) moments[i] = statics.section_moments(i + 1, config.policy, bounds);

  const auto torques = shaft::mean_alt_torque(layout.torque_max, layout.torque_min);

  shaft::DeflectionSetup deflection;
  deflection.mode = config.deflection_mode;
  deflection.effective_section = config.effective_section;
  deflection.forces = statics.load_case(Plane::horizontal, PowerLevel::max).all_forces();
  deflection.supports = layout.supports;
  deflection.station = config.deflection_station;
  deflection.stations = config.numeric_stations;

  shaft::ShaftProblem problem(config.spec, moments, torques, std::move(deflection),
                              config.constraints);
  return ShaftSetup{std::move(statics), moments, torques, std::move(problem)};
}

search::Bounds ShaftSearchProblem::bounds() const {
  const auto& s = problem_.spec();
  return {{s.lower_bound, s.lower_bound, s.lower_bound},
          {s.upper_bound, s.upper_bound, s.upper_bound}};
}

search::Evaluation ShaftSearchProblem::evaluate(std::span<const double> x, double theta) const {
  const auto e = problem_.evaluate(to_design(x), theta);
  return {e.weight, e.penalized, e.report.feasible};
}

shaft::DesignVector to_design(std::span<const double> x) {
  if (x.size() != 3) throw std::invalid_argument("shaft design vectors have three entries");
  return {{x[0], x[1], x[2]}};
}

std::string statics_report(const ShaftSetup& setup, const RunConfig& config) {
  const auto& st = setup.statics;
  const auto& layout = st.layout();
  std::string out;
  out += "Shaft statics\n";
  out += fmt::format("  belt tension ratio T1/T2 = {:.6f} (exact exp(mu*alpha*cosec beta) = {:.6f})\n",
                     layout.pulley.tension_ratio(), layout.pulley.exact_tension_ratio());
  for (PowerLevel level : {PowerLevel::max, PowerLevel::min}) {
    const auto t = st.tensions(level);
    const auto p = st.pulley_loads(level);
    const auto g = st.gear_loads(level);
    out += fmt::format("\n[{} power] torque = {} lb*in\n", beam::to_string(level),
                       level == PowerLevel::max ? layout.torque_max : layout.torque_min);
    out += fmt::format("  T1 = {:.4f} lb, T2 = {:.4f} lb\n", t.tight, t.slack);
    out += fmt::format("  pulley load @ {}: vertical {:.4f} lb, horizontal {:.4f} lb\n",
                       layout.pulley_position, p.vertical, p.horizontal);
    out += fmt::format("  gear load   @ {}: vertical {:.4f} lb, horizontal {:.4f} lb\n",
                       layout.gear_position, g.vertical, g.horizontal);
    for (Plane plane : {Plane::vertical, Plane::horizontal}) {
      const auto& c = st.load_case(plane, level);
      out += fmt::format("  {:<10} reactions: R_A({}) = {:.4f} lb, R_B({}) = {:.4f} lb\n",
                         beam::to_string(plane), c.supports[0], (*c.reactions)[0], c.supports[1],
                         (*c.reactions)[1]);
    }
  }
  out += fmt::format("\nmax equilibrium residual = {:.3e}\n", st.max_equilibrium_residual());
  out += fmt::format("horizontal max-power moment at gear ({}) = {:.4f} lb*in\n",
                     layout.gear_position,
                     st.moment(Plane::horizontal, PowerLevel::max, layout.gear_position));
  out += fmt::format("\nsection moments (policy {})\n", beam::to_string(config.policy.kind));
  for (const auto& m : setup.moments) {
    out += fmt::format("  section {}: x = {}  M_a = {:.4f}  M_m = {:.4f} lb*in\n", m.section_index,
                       m.eval_position, m.alternating, m.mean);
  }
  out += fmt::format("evaluation positions = {}, {}, {}\n", setup.moments[0].eval_position,
                     setup.moments[1].eval_position, setup.moments[2].eval_position);
  out += fmt::format("torques: T_max = {} T_min = {} T_mean = {} T_alt = {} lb*in\n",
                     setup.torques.max, setup.torques.min, setup.torques.mean, setup.torques.alt);
  return out;
}

std::string statics_csv(const beam::ShaftStatics& statics) {
  std::string out =
      "x,shear_v_max,moment_v_max,shear_h_max,moment_h_max,shear_v_min,moment_v_min,"
      "shear_h_min,moment_h_min,resultant_max,resultant_min\n";
  for (double x : statics.breakpoints()) {
    out += fmt::format("{}", x);
    for (PowerLevel level : {PowerLevel::max, PowerLevel::min}) {
      for (Plane plane : {Plane::vertical, Plane::horizontal}) {
        const auto& c = statics.load_case(plane, level);
        out += fmt::format(",{},{}", beam::shear_force(c, x), beam::bending_moment(c, x));
      }
    }
    out += fmt::format(",{},{}\n", statics.resultant_moment(x, PowerLevel::max),
                       statics.resultant_moment(x, PowerLevel::min));
  }
  return out;
}

std::string commented_config(const RunConfig& config) {
  std::string out;
  std::istringstream in(to_config_text(config));
  for (std::string line; std::getline(in, line);) out += "# " + line + "\n";
  return out;
}

std::string trace_csv(std::span<const search::RunResult> runs) {
  std::string out = "run,seed,iteration,evaluations,best_F,best_f,feasible,feasible_fraction,interval\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& t : runs[r].trace) {
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r, runs[r].seed, t.iteration,
                         t.evaluations, t.best_penalized, t.best_objective, t.best_feasible ? 1 : 0,
                         t.feasible_fraction, t.interval);
    }
  }
  return out;
}

std::string runs_csv(std::span<const search::RunResult> runs) {
  std::string out =
      "run,seed,best_f,best_F,feasible,evaluations,iterations,terminated_by,wall_seconds,d1,d2,d3\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& run = runs[r];
    out += fmt::format("{},{},{},{},{},{},{},{},{:.6f},{},{},{}\n", r, run.seed, run.best_objective,
                       run.best_penalized, run.best_feasible ? 1 : 0, run.evaluations,
                       run.iterations, search::to_string(run.terminated_by), run.wall_seconds,
                       run.best_position[0], run.best_position[1], run.best_position[2]);
  }
  return out;
}

std::string stats_csv(const search::BatchStats& s) {
  return fmt::format(
      "runs,best,mean,worst,std,mean_evaluations,mean_wall_seconds,feasible_runs,best_run\n"
      "{},{},{},{},{},{},{:.6f},{},{}\n",
      s.runs, s.best, s.mean, s.worst, s.standard_deviation, s.mean_evaluations,
      s.mean_wall_seconds, s.feasible_runs, s.best_run);
}

std::string format_summary(const RunConfig& config, const ShaftSetup& setup,
                           const search::RunResult& run, int run_index) {
  const auto d = to_design(run.best_position);
  const auto e = setup.problem.evaluate(d, config.algorithm.theta);
  std::string out = "# shms run summary\n";
  out += to_config_text(config);
  out += "\n[result]\n";
  out += fmt::format("run_index = {}\n", run_index);
  out += fmt::format("seed = {}\n", run.seed);
  out += fmt::format("d1 = {}\nd2 = {}\nd3 = {}\n", d[0], d[1], d[2]);
  out += fmt::format("weight = {}\n", e.weight);
  out += fmt::format("penalized = {}\n", e.penalized);
  out += fmt::format("feasible = {}\n", e.report.feasible ? "true" : "false");
  for (std::size_t j = 0; j < shaft::kConstraintCount; ++j) {
    out += fmt::format("g{} = {}{}\n", j + 1, e.report.signed_values[j],
                       e.report.enabled[j] ? "" : "  # disabled");
  }
  for (std::size_t j = 0; j < 3; ++j) {
    out += fmt::format("required_d{} = {}\n", j + 1, e.report.required[j]);
  }
  out += fmt::format("deflection = {}\n", e.report.deflection);
  out += fmt::format("evaluations = {}\n", run.evaluations);
  out += fmt::format("iterations = {}\n", run.iterations);
  out += fmt::format("terminated_by = {}\n", search::to_string(run.terminated_by));
  return out;
}

SummaryRecord read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  SummaryRecord record;
  record.config = parse_config(text, path.string(), {"result"});

  std::istringstream lines(text);
  bool in_result = false;
  int found = 0;
  for (std::string line; std::getline(lines, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.starts_with("[")) {
      in_result = line.starts_with("[result]");
      continue;
    }
    if (!in_result) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    std::erase(key, ' ');
    std::erase(value, ' ');
    auto number = [&] { return std::stod(value); };
    if (key == "d1") { record.design[0] = number(); ++found; }
    else if (key == "d2") { record.design[1] = number(); ++found; }
    else if (key == "d3") { record.design[2] = number(); ++found; }
    else if (key == "weight") { record.weight = number(); ++found; }
    else if (key == "penalized") { record.penalized = number(); ++found; }
  }
  if (found != 5) {
    throw std::runtime_error(fmt::format("{}: incomplete [result] section", path.string()));
  }
  return record;
}

OptimizeOutput cmd_optimize(const RunConfig& config, int runs) {
  if (runs < 1) throw std::invalid_argument("--runs must be >= 1");
  const auto setup = build_problem(config);
  const ShaftSearchProblem problem(setup.problem);

  OptimizeOutput out;
  if (runs == 1) {
    out.batch.runs.push_back(search::run(problem, config.algorithm));
    out.batch.stats = search::summarize(out.batch.runs);
  } else {
    out.batch = search::batch(problem, config.algorithm, runs, config.threads);
  }

  const auto dir = prepare_directory(config);
  const auto best = out.batch.stats.best_run;
  out.files.push_back(dir / "summary.txt");
  write_file(out.files.back(),
             format_summary(config, setup, out.batch.runs[best], static_cast<int>(best)));
  if (config.write_trace) {
    out.files.push_back(dir / "trace.csv");
    write_file(out.files.back(), commented_config(config) + trace_csv(out.batch.runs));
  }
  if (runs > 1) {
    out.files.push_back(dir / "runs.csv");
    write_file(out.files.back(), commented_config(config) + runs_csv(out.batch.runs));
    out.files.push_back(dir / "stats.csv");
    write_file(out.files.back(), commented_config(config) + stats_csv(out.batch.stats));
  }
  return out;
}

OracleOutput cmd_oracle(const RunConfig& config) {
  const auto setup = build_problem(config);
  OracleOutput out;
  out.result = run_oracle(setup.problem,
                          {config.oracle_step, config.oracle_refinements, config.threads});
  const auto& r = out.result;
  std::string text = "# shms grid oracle\n" + to_config_text(config) + "\n[oracle]\n";
  text += fmt::format("found = {}\n", r.found ? "true" : "false");
  text += fmt::format("d1 = {}\nd2 = {}\nd3 = {}\n", r.best[0], r.best[1], r.best[2]);
  text += fmt::format("weight = {}\n", r.best_f);
  text += fmt::format("feasible = {}\n", r.report.feasible ? "true" : "false");
  for (std::size_t j = 0; j < shaft::kConstraintCount; ++j) {
    text += fmt::format("g{} = {}\n", j + 1, r.report.signed_values[j]);
  }
  text += fmt::format("deflection = {}\n", r.report.deflection);
  text += fmt::format("resolution = {}\nlevels = {}\nevaluated = {}\n", r.resolution, r.levels,
                      r.evaluated);
  const auto dir = prepare_directory(config);
  out.files.push_back(dir / "oracle.txt");
  write_file(out.files.back(), text);
  return out;
}

std::vector<std::filesystem::path> cmd_statics_report(const RunConfig& config) {
  const auto setup = build_problem(config);
  const auto dir = prepare_directory(config);
  std::vector<std::filesystem::path> files{dir / "statics.csv", dir / "statics.txt"};
  write_file(files[0], commented_config(config) + statics_csv(setup.statics));
  write_file(files[1], statics_report(setup, config) + "\n" + commented_config(config));
  return files;
}

}  // namespace snail::app
