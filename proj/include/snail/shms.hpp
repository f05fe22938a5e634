// Snail Homing and Mating Search: a population optimizer over a box-bounded
// search space. Snails live around homes; each iteration they are scored by
// a penalized objective, pick a fecund mate by roulette over 1/F, step
// toward it by a normalized love-dart factor, and are re-sampled inside a
// shrinking neighbourhood of their home's best position.

#ifndef SNAIL_SHMS_HPP
#define SNAIL_SHMS_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace snail::search {

using Rng = std::mt19937_64;

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
  void validate() const;
};

struct Evaluation {
  double objective = 0.0;  // raw f(X)
  double penalized = 0.0;  // F(X) = f(X) + penalty
  bool feasible = true;
};

/// A bounded minimization problem. Implementations must be safe to call
/// concurrently from several runs.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual Bounds bounds() const = 0;
  virtual Evaluation evaluate(std::span<const double> x, double theta) const = 0;
};

struct Params {
  int homes = 3;
  int snails_per_home = 10;
  double initial_interval = 0.25;  // fraction of each variable's range
  double interval_shrink = 0.9;
  double theta = 1e5;
  int max_iterations = 50;
  long max_evaluations = 100000;
  int stagnation_window = 15;
  double improvement_tolerance = 1e-10;
  double interval_floor = 1e-8;  // fraction of range
  double epsilon = 1e-12;
  std::uint64_t seed = 20240917;

  void validate() const;
};

struct Snail {
  std::vector<double> position;
  double objective = 0.0;
  double penalized = 0.0;
  bool feasible = false;
  std::vector<double> history;  // last pseudo-objectives, oldest first
  double fecundity = 0.0;

  void record(double value);
};

struct Home {
  std::vector<double> center;
  std::vector<double> interval;  // half-width per dimension
  std::vector<Snail> snails;
  double best_penalized = 0.0;
};

enum class Termination { max_iter, max_eval, stagnation, interval_floor };

const char* to_string(Termination t);

struct TraceRecord {
  int iteration = 0;
  long evaluations = 0;
  double best_penalized = 0.0;
  double best_objective = 0.0;
  bool best_feasible = false;
  double feasible_fraction = 0.0;
  double interval = 0.0;  // widest home half-width, as a fraction of its range
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> best_position;
  double best_penalized = 0.0;
  double best_objective = 0.0;
  bool best_feasible = false;
  long evaluations = 0;
  int iterations = 0;
  std::vector<TraceRecord> trace;
  Termination terminated_by = Termination::max_iter;
  double wall_seconds = 0.0;
};

struct BatchStats {
  int runs = 0;
  double best = 0.0;
  double worst = 0.0;
  double mean = 0.0;
  double standard_deviation = 0.0;
  double mean_evaluations = 0.0;
  double mean_wall_seconds = 0.0;
  int feasible_runs = 0;
  std::size_t best_run = 0;
};

struct BatchResult {
  std::vector<RunResult> runs;
  BatchStats stats;
};

// -- Building blocks -----------------------------------------------------------

/// Snails sampled uniformly in [center - interval, center + interval],
/// clipped to the global bounds and scored.
std::vector<Snail> spawn_snails(const Problem& problem, std::span<const double> center,
                                std::span<const double> interval, int count,
                                const Bounds& bounds, double theta, Rng& rng);

/// Homes at uniform random centers, each populated by spawn_snails.
std::vector<Home> init_homes(const Problem& problem, const Params& params, Rng& rng);

/// |(F_t - F_{t-1}) / (F_t - F_{t-2})| from a history ordered oldest first,
/// or a uniform draw in (0, 1) while fewer than three values exist or the
/// ratio is zero or undefined.
double fecundity_index(std::span<const double> history, Rng& rng);

/// P_s proportional to 1/F_s. Non-positive values shift the whole
/// population by |F_min| + 1 first.
std::vector<double> selection_probability(std::span<const double> penalized);

/// Cumulative-sum roulette wheel.
std::size_t roulette_select(std::span<const double> probabilities, Rng& rng);

/// 1 / (I * (F_self - F_fecund)) with |I| and |F_self - F_fecund| held at or
/// above epsilon and |LD| capped at 1/epsilon.
double love_dart(double fecundity, double f_self, double f_fecund, double epsilon = 1e-12);

/// Min-max scaling to [0, 1]; a constant input maps to 0.5.
std::vector<double> normalize_love_darts(std::span<const double> darts);

/// position - LDn * (position - fecund), clipped to bounds.
std::vector<double> update_position(std::span<const double> position,
                                    std::span<const double> fecund, double normalized_dart,
                                    const Bounds& bounds);

// -- Drivers -------------------------------------------------------------------

RunResult run(const Problem& problem, const Params& params);

std::uint64_t derive_seed(std::uint64_t master, std::size_t run_index);

BatchStats summarize(std::span<const RunResult> runs);

/// Independent runs seeded by derive_seed(params.seed, i). `threads` = 0
/// picks the hardware concurrency. Results are ordered by run index.
BatchResult batch(const Problem& problem, const Params& params, int num_runs,
                  int threads = 0);

}  // namespace snail::search

#endif  // SNAIL_SHMS_HPP
