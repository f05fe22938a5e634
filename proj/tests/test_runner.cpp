#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "snail/runner.hpp"

using namespace snail;
using app::RunConfig;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(SNAIL_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::istringstream cols(line);
    for (std::string cell; std::getline(cols, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

RunConfig paper_config(const std::string& dir) {
  RunConfig c;
  app::apply_override(c, "policy.eval_policy=paper-mode");
  c.output_directory = scratch(dir).string();
  return c;
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("build_problem binds statics and moments") {
  RunConfig c;
  app::apply_override(c, "policy.eval_policy=paper-mode");
  const auto setup = app::build_problem(c);
  CHECK(setup.statics.max_equilibrium_residual() < 1e-6);
  CHECK(setup.moments[0].eval_position == 5.9);
  CHECK(setup.moments[1].eval_position == 15.9);
  CHECK(setup.moments[2].eval_position == 20.9);
  CHECK(setup.torques.mean == 2187.5);
  CHECK(setup.torques.alt == 1312.5);
  const auto& forces = setup.problem.deflection_setup().forces;
  REQUIRE(forces.size() == 4);
  CHECK(forces[0].position == 0.0);
  CHECK(forces[0].magnitude == doctest::Approx(-194.9801).epsilon(1e-6));

  const auto report = app::statics_report(setup, c);
  CHECK(report.find("-668.4377") != std::string::npos);
  CHECK(report.find("292.4809") != std::string::npos);
  CHECK(report.find("evaluation positions = 5.9, 15.9, 20.9") != std::string::npos);
}

TEST_CASE("adaptor evaluates the shaft problem") {
  const RunConfig c;
  const auto setup = app::build_problem(c);
  const app::ShaftSearchProblem adaptor(setup.problem);
  const auto b = adaptor.bounds();
  CHECK(b.lower == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(b.upper == std::vector<double>{3.0, 3.0, 3.0});
  const std::vector<double> x{1.0, 1.0, 1.0};
  const auto e = adaptor.evaluate(x, 1e5);
  const auto direct = setup.problem.evaluate(app::to_design(x), 1e5);
  CHECK(e.objective == direct.weight);
  CHECK(e.penalized == direct.penalized);
  CHECK_FALSE(e.feasible);
}

TEST_CASE("statics export") {
  RunConfig c;
  c.output_directory = scratch("statics").string();
  const auto files = app::cmd_statics_report(c);
  REQUIRE(files.size() == 2);
  const auto text = slurp(files[0]);
  CHECK(text.find("# [algorithm]") != std::string::npos);
  const auto rows = csv_rows(text);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0][0] == "x");
  std::vector<double> xs;
  for (std::size_t i = 1; i < rows.size(); ++i) xs.push_back(std::stod(rows[i][0]));
  for (double x : {0.0, 5.9, 15.9, 25.9}) {
    CHECK(std::find(xs.begin(), xs.end(), x) != xs.end());
  }
  // Every moment column vanishes at both ends.
  for (std::size_t col = 1; col < rows[0].size(); ++col) {
    if (rows[0][col].find("moment") == std::string::npos) continue;
    CHECK(std::abs(std::stod(rows[1][col])) < 1e-9);
    CHECK(std::abs(std::stod(rows.back()[col])) < 1e-9);
  }
  const auto setup = app::build_problem(c);
  CHECK(std::abs(setup.statics.moment(beam::Plane::horizontal, beam::PowerLevel::max, 15.9) - 2924.8087) < 1e-3);
}

TEST_CASE("single run summary is reproducible byte for byte") {
  RunConfig c = paper_config("single");
  const auto first = app::cmd_optimize(c, 1);
  const auto a = slurp(first.files[0]);
  const auto second = app::cmd_optimize(c, 1);
  const auto b = slurp(second.files[0]);
  CHECK(a == b);
  CHECK(a.find("seed = 20240917") != std::string::npos);
  CHECK(a.find("eval_policy = paper-mode") != std::string::npos);
  CHECK(first.batch.runs[0].seed == c.algorithm.seed);
}

TEST_CASE("summaries round-trip to the reported objective") {
  RunConfig c = paper_config("roundtrip");
  c.algorithm.seed = 99;
  const auto out = app::cmd_optimize(c, 4);
  const auto summary = app::read_summary(out.files[0]);
  const auto setup = app::build_problem(summary.config);
  const auto e = setup.problem.evaluate(summary.design, summary.config.algorithm.theta);
  CHECK(std::abs(e.weight - summary.weight) <= 1e-9);
  CHECK(std::abs(e.penalized - summary.penalized) <= 1e-9);
  const auto& best = out.batch.runs[out.batch.stats.best_run];
  CHECK(std::abs(summary.penalized - best.best_penalized) <= 1e-9);
  CHECK(app::to_config_text(summary.config) == app::to_config_text(c));

  // Every row of runs.csv re-evaluates to its reported objective.
  std::string runs_file;
  for (const auto& f : out.files) {
    if (f.filename() == "runs.csv") runs_file = f.string();
  }
  REQUIRE_FALSE(runs_file.empty());
  const auto rows = csv_rows(slurp(runs_file));
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const shaft::DesignVector d{{std::stod(rows[i][9]), std::stod(rows[i][10]), std::stod(rows[i][11])}};
    const auto ev = setup.problem.evaluate(d, c.algorithm.theta);
    CHECK(std::abs(ev.weight - std::stod(rows[i][2])) <= 1e-9);
    CHECK(std::abs(ev.penalized - std::stod(rows[i][3])) <= 1e-9);
  }
}

TEST_CASE("batch output files") {
  RunConfig c = paper_config("batch");
  const auto out = app::cmd_optimize(c, 5);
  std::vector<std::string> names;
  for (const auto& f : out.files) names.push_back(f.filename().string());
  CHECK(names == std::vector<std::string>{"summary.txt", "trace.csv", "runs.csv", "stats.csv"});
  const auto stats = csv_rows(slurp(out.files[3]));
  REQUIRE(stats.size() == 2);
  CHECK(stats[0][1] == "best");
  CHECK(stats[1][0] == "5");
  const auto trace = slurp(out.files[1]);
  CHECK(trace.find("# seed = 20240917") != std::string::npos);
}

TEST_CASE("switching g6 off keeps the deflection in the summary") {
  RunConfig c = paper_config("g6off");
  app::apply_override(c, "policy.enable_g6=false");
  const auto out = app::cmd_optimize(c, 1);
  const auto text = slurp(out.files[0]);
  CHECK(text.find("deflection = ") != std::string::npos);
  CHECK(text.find("# disabled") != std::string::npos);
  const auto summary = app::read_summary(out.files[0]);
  CHECK_FALSE(summary.config.constraints.enabled[5]);
  const auto& run = out.batch.runs[0];
  CHECK(run.best_feasible);
  // Without the stiffness limit the search settles near the fatigue diameter.
  CHECK(run.best_position[1] < 1.87);
}

TEST_CASE("oracle on a coarse grid is feasible and bounds the search") {
  RunConfig c = paper_config("oracle");
  c.oracle_refinements = 4;
  const auto out = app::cmd_oracle(c);
  const auto& r = out.result;
  REQUIRE(r.found);
  CHECK(r.report.feasible);
  for (double v : r.report.violations) CHECK(v <= 1e-6);
  CHECK(r.levels == 5);
  CHECK(r.resolution == doctest::Approx(1e-6));
  CHECK(r.best_f == doctest::Approx(17.0545).epsilon(1e-4));

  const auto setup = app::build_problem(c);
  const app::ShaftSearchProblem problem(setup.problem);
  const auto batch = search::batch(problem, c.algorithm, 10);
  for (const auto& run : batch.runs) {
    if (run.best_feasible) CHECK(run.best_objective >= r.best_f - 1e-4);
  }
  CHECK(slurp(out.files[0]).find("[oracle]") != std::string::npos);
}

TEST_CASE("oracle is independent of the worker count") {
  RunConfig c = paper_config("oracle-threads");
  c.oracle_step = 0.05;
  c.oracle_refinements = 2;
  const auto setup = app::build_problem(c);
  const auto one = app::run_oracle(setup.problem, {0.05, 2, 1});
  const auto four = app::run_oracle(setup.problem, {0.05, 2, 4});
  CHECK(one.best == four.best);
  CHECK(one.best_f == four.best_f);
  CHECK_THROWS(app::run_oracle(setup.problem, {0.0, 2, 1}));
}

}
