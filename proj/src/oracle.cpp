#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

#include "snail/runner.hpp"

namespace snail::app {

namespace {

struct Candidate {
  double weight = std::numeric_limits<double>::infinity();
  shaft::DesignVector design;
  bool found = false;
  long evaluated = 0;

  // Ties on weight break on (d2, d1, d3) so the answer does not depend on
  // how slabs were split between workers.
  bool better_than(const Candidate& other) const {
    if (!found) return false;
    if (!other.found) return true;
    return std::tie(weight, design.d[1], design.d[0], design.d[2]) <
           std::tie(other.weight, other.design.d[1], other.design.d[0], other.design.d[2]);
  }
};

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> values;
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) values.push_back(lo + static_cast<double>(i) * step);
  return values;
}

std::vector<double> window(double center, double step, int half_width, double lo, double hi) {
  std::vector<double> values;
  for (int i = -half_width; i <= half_width; ++i) {
    const double v = i == 0 ? center : center + i * step;
    if (v >= lo && v <= hi) values.push_back(v);
  }
  return values;
}

// Fatigue checks are cheap next to a numeric deflection, so they go first.
bool strength_ok(const shaft::ShaftProblem& problem, const shaft::DesignVector& d) {
  const auto& options = problem.options();
  for (int j = 0; j < 3; ++j) {
    if (!options.enabled[j]) continue;
    const double k = shaft::goodman_required_diameter(j + 1, problem.moments()[j], problem.torques(),
                                                      problem.spec(), d[j]);
    if (k - d[j] > options.tolerance) return false;
  }
  return true;
}

// Scans the product grid d1s x d2s x d3s. Weight grows with each diameter, so
// a point heavier than the worker's incumbent ends the innermost loop.
Candidate scan(const shaft::ShaftProblem& problem, const std::vector<double>& d1s,
               const std::vector<double>& d2s, const std::vector<double>& d3s, int threads,
               const Candidate& seed) {
  const auto& spec = problem.spec();
  const auto& options = problem.options();
  const double slack = options.tolerance;
  const bool prune_g4 = options.enabled[3];
  const bool prune_g5 = options.enabled[4];

  std::atomic<std::size_t> next{0};
  std::mutex merge;
  Candidate best = seed;
  best.evaluated = 0;

  std::exception_ptr failure;
  auto slabs = [&] {
    Candidate local = seed;
    local.evaluated = 0;
    for (std::size_t k = next++; k < d2s.size(); k = next++) {
      const double d2 = d2s[k];
      for (double d1 : d1s) {
        if (prune_g4 && spec.step_gap - (d2 - d1) > slack) break;
        for (double d3 : d3s) {
          if (prune_g5 && spec.step_gap - (d2 - d3) > slack) break;
          const shaft::DesignVector d{{d1, d2, d3}};
          const double w = problem.weight(d);
          if (local.found && w > local.weight) break;
          ++local.evaluated;
          if (!strength_ok(problem, d) || !problem.constraints(d).feasible) continue;
          Candidate c{w, d, true, 0};
          if (c.better_than(local)) {
            local.weight = w;
            local.design = d;
            local.found = true;
          }
        }
      }
    }
    std::lock_guard lock(merge);
    best.evaluated += local.evaluated;
    if (local.better_than(best)) {
      best.weight = local.weight;
      best.design = local.design;
      best.found = true;
    }
  };
  auto work = [&] {
    try {
      slabs();
    } catch (...) {
      std::lock_guard lock(merge);
      if (!failure) failure = std::current_exception();
      next = d2s.size();
    }
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(1, d2s.size())));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return best;
}

}  // namespace

OracleResult run_oracle(const shaft::ShaftProblem& problem, const OracleOptions& options) {
  if (!(options.step > 0.0)) throw std::invalid_argument("oracle step must be positive");
  if (options.refinements < 0) throw std::invalid_argument("oracle refinements must be >= 0");
  const auto started = std::chrono::steady_clock::now();
  const auto& spec = problem.spec();
  const double lo = spec.lower_bound;
  const double hi = spec.upper_bound;

  OracleResult result;
  const auto grid = axis(lo, hi, options.step);
  Candidate best = scan(problem, grid, grid, grid, options.threads, Candidate{});
  result.evaluated = best.evaluated;
  result.levels = 1;
  result.resolution = options.step;

  double step = options.step;
  for (int level = 0; level < options.refinements && best.found; ++level) {
    const double fine = step / 10.0;
    const auto d1s = window(best.design[0], fine, 20, lo, hi);
    const auto d2s = window(best.design[1], fine, 20, lo, hi);
    const auto d3s = window(best.design[2], fine, 20, lo, hi);
    Candidate refined = scan(problem, d1s, d2s, d3s, options.threads, best);
    result.evaluated += refined.evaluated;
    if (refined.better_than(best)) {
      best.weight = refined.weight;
      best.design = refined.design;
    }
    step = fine;
    ++result.levels;
    result.resolution = fine;
  }

  result.found = best.found;
  if (best.found) {
    result.best = best.design;
    result.best_f = best.weight;
    result.report = problem.constraints(best.design);
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace snail::app
