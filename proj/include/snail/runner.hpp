// Assembles the shaft problem from a configuration and drives the optimizer,
// the exhaustive grid oracle and the statics export.

#ifndef SNAIL_RUNNER_HPP
#define SNAIL_RUNNER_HPP

#include <array>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snail/beam_statics.hpp"
#include "snail/config.hpp"
#include "snail/shaft_model.hpp"
#include "snail/shms.hpp"

namespace snail::app {

class StaticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kEquilibriumTolerance = 1e-6;

struct ShaftSetup {
  beam::ShaftStatics statics;
  std::array<beam::SectionMoments, 3> moments;
  shaft::TorqueSpec torques;
  shaft::ShaftProblem problem;
};

/// Runs the statics end to end and binds the constraint model. Throws
/// StaticsError when any load case misses equilibrium.
ShaftSetup build_problem(const RunConfig& config);

/// Adapts a ShaftProblem to the optimizer's interface.
class ShaftSearchProblem : public search::Problem {
 public:
  explicit ShaftSearchProblem(const shaft::ShaftProblem& problem) : problem_(problem) {}

  search::Bounds bounds() const override;
  search::Evaluation evaluate(std::span<const double> x, double theta) const override;

 private:
  const shaft::ShaftProblem& problem_;
};

shaft::DesignVector to_design(std::span<const double> x);

// -- Oracle --------------------------------------------------------------------

struct OracleOptions {
  double step = 0.01;
  int refinements = 9;  // each one shrinks the step tenfold
  int threads = 0;
};

struct OracleResult {
  bool found = false;
  shaft::DesignVector best;
  double best_f = 0.0;
  shaft::ConstraintReport report;
  double resolution = 0.0;  // final grid step
  int levels = 0;
  long evaluated = 0;       // full constraint evaluations
  double seconds = 0.0;
};

/// Exhaustive feasible-grid search over the bounds box: a coarse pass with
/// the step-gap constraints applied as box limits, then tenfold
/// refinements in a +/- two-step window around the incumbent.
OracleResult run_oracle(const shaft::ShaftProblem& problem, const OracleOptions& options);

// -- Reports and files ---------------------------------------------------------

std::string statics_report(const ShaftSetup& setup, const RunConfig& config);

/// Breakpoint table: x, shear and moment for the four plane/power cases, and
/// the resultant moment at both power levels.
std::string statics_csv(const beam::ShaftStatics& statics);

std::string trace_csv(std::span<const search::RunResult> runs);
std::string runs_csv(std::span<const search::RunResult> runs);
std::string stats_csv(const search::BatchStats& stats);

/// Deterministic run summary: configuration echo followed by a [result]
/// section holding the design, weight, constraint values and deflection.
std::string format_summary(const RunConfig& config, const ShaftSetup& setup,
                           const search::RunResult& run, int run_index);

struct SummaryRecord {
  RunConfig config;
  shaft::DesignVector design;
  double weight = 0.0;
  double penalized = 0.0;
};

SummaryRecord read_summary(const std::filesystem::path& path);

/// Config echo as '#'-prefixed lines for CSV headers.
std::string commented_config(const RunConfig& config);

// -- Commands ------------------------------------------------------------------

struct OptimizeOutput {
  search::BatchResult batch;
  std::vector<std::filesystem::path> files;
};

/// One run seeded with the configured seed when `runs` is 1; otherwise a
/// batch with per-run seeds derived from it.
OptimizeOutput cmd_optimize(const RunConfig& config, int runs);

struct OracleOutput {
  OracleResult result;
  std::vector<std::filesystem::path> files;
};

OracleOutput cmd_oracle(const RunConfig& config);

std::vector<std::filesystem::path> cmd_statics_report(const RunConfig& config);

}  // namespace snail::app

#endif  // SNAIL_RUNNER_HPP
