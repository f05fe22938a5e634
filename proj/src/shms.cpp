#include "snail/shms.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace snail::search {

namespace {

constexpr std::size_t kHistoryDepth = 3;

double uniform_open01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = dist(rng);
  while (u <= 0.0) u = dist(rng);
  return u;
}

Snail score(const Problem& problem, std::vector<double> position, double theta) {
  Snail s;
  const Evaluation e = problem.evaluate(position, theta);
  s.position = std::move(position);
  s.objective = e.objective;
  s.penalized = e.penalized;
  s.feasible = e.feasible;
  s.record(e.penalized);
  return s;
}

}  // namespace

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != dimension()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

void Bounds::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("bounds must be non-empty with matching dimensions");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) {
      throw std::invalid_argument(fmt::format(
          "degenerate bounds in dimension {}: lower {} is not below upper {}", i, lower[i],
          upper[i]));
    }
  }
}

void Params::validate() const {
  if (homes < 1) throw std::invalid_argument("need at least one home");
  if (snails_per_home < 2) throw std::invalid_argument("need at least two snails per home");
  if (!(interval_shrink > 0.0 && interval_shrink < 1.0)) {
    throw std::invalid_argument("interval shrink must lie in (0, 1)");
  }
  if (!(initial_interval > 0.0 && initial_interval <= 1.0)) {
    throw std::invalid_argument("initial interval must lie in (0, 1]");
  }
  if (!(theta > 0.0)) throw std::invalid_argument("penalty parameter must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max iterations must be >= 1");
  if (max_evaluations < 1) throw std::invalid_argument("max evaluations must be >= 1");
  if (stagnation_window < 1) throw std::invalid_argument("stagnation window must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(interval_floor >= 0.0)) throw std::invalid_argument("interval floor must be >= 0");
}

void Snail::record(double value) {
  history.push_back(value);
  if (history.size() > kHistoryDepth) history.erase(history.begin());
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::max_iter: return "max_iter";
    case Termination::max_eval: return "max_eval";
    case Termination::stagnation: return "stagnation";
    case Termination::interval_floor: return "interval_floor";
  }
  return "?";
}

std::vector<Snail> spawn_snails(const Problem& problem, std::span<const double> center,
                                std::span<const double> interval, int count,
                                const Bounds& bounds, double theta, Rng& rng) {
  std::vector<Snail> snails;
  snails.reserve(static_cast<std::size_t>(count));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int s = 0; s < count; ++s) {
    std::vector<double> x(center.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::clamp(center[i] + interval[i] * unit(rng), bounds.lower[i], bounds.upper[i]);
    }
    snails.push_back(score(problem, std::move(x), theta));
  }
  return snails;
}

std::vector<Home> init_homes(const Problem& problem, const Params& params, Rng& rng) {
  const Bounds bounds = problem.bounds();
  bounds.validate();
  params.validate();
  const std::size_t n = bounds.dimension();

  std::vector<Home> homes(static_cast<std::size_t>(params.homes));
  for (auto& home : homes) {
    home.center.resize(n);
    home.interval.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_real_distribution<double> dist(bounds.lower[i], bounds.upper[i]);
      home.center[i] = dist(rng);
      home.interval[i] = params.initial_interval * (bounds.upper[i] - bounds.lower[i]);
    }
  }
  for (auto& home : homes) {
    home.snails = spawn_snails(problem, home.center, home.interval, params.snails_per_home,
                               bounds, params.theta, rng);
    home.best_penalized = std::numeric_limits<double>::infinity();
  }
  return homes;
}

double fecundity_index(std::span<const double> history, Rng& rng) {
  if (history.size() >= 3) {
    const double now = history[history.size() - 1];
    const double prev = history[history.size() - 2];
    const double prev2 = history[history.size() - 3];
    const double denominator = now - prev2;
    if (denominator != 0.0) {
      const double index = std::abs((now - prev) / denominator);
      if (index != 0.0 && std::isfinite(index)) return index;
    }
  }
  return uniform_open01(rng);
}

std::vector<double> selection_probability(std::span<const double> penalized) {
  std::vector<double> p(penalized.begin(), penalized.end());
  if (p.empty()) return p;
  const double lowest = *std::min_element(p.begin(), p.end());
  if (lowest <= 0.0) {
    const double shift = std::abs(lowest) + 1.0;
    for (double& v : p) v += shift;
  }
  double total = 0.0;
  for (double& v : p) {
    v = 1.0 / v;
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t roulette_select(std::span<const double> probabilities, Rng& rng) {
  if (probabilities.empty()) throw std::invalid_argument("cannot select from an empty population");
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const double spin = dist(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (spin < cumulative) return i;
  }
  // Rounding left the wheel short of 1; fall back to the last non-empty slot.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

double love_dart(double fecundity, double f_self, double f_fecund, double epsilon) {
  const double index = std::max(std::abs(fecundity), epsilon);
  double difference = f_self - f_fecund;
  if (std::abs(difference) < epsilon) difference = difference < 0.0 ? -epsilon : epsilon;
  const double dart = 1.0 / (index * difference);
  const double cap = 1.0 / epsilon;
  return std::clamp(dart, -cap, cap);
}

std::vector<double> normalize_love_darts(std::span<const double> darts) {
  std::vector<double> out(darts.size(), 0.5);
  if (darts.empty()) return out;
  const auto [lo, hi] = std::minmax_element(darts.begin(), darts.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < darts.size(); ++i) out[i] = (darts[i] - *lo) / span;
  return out;
}

std::vector<double> update_position(std::span<const double> position,
                                    std::span<const double> fecund, double normalized_dart,
                                    const Bounds& bounds) {
  std::vector<double> next(position.size());
  for (std::size_t i = 0; i < position.size(); ++i) {
    const double step = normalized_dart * (position[i] - fecund[i]);
    next[i] = std::clamp(position[i] - step, bounds.lower[i], bounds.upper[i]);
  }
  return next;
}

RunResult run(const Problem& problem, const Params& params) {
  const auto started = std::chrono::steady_clock::now();
  params.validate();
  const Bounds bounds = problem.bounds();
  bounds.validate();
  const std::size_t n = bounds.dimension();
  const std::size_t per_home = static_cast<std::size_t>(params.snails_per_home);
  const long per_iteration = static_cast<long>(params.homes) * params.snails_per_home;

  Rng rng(params.seed);
  RunResult result;
  result.seed = params.seed;
  result.best_penalized = std::numeric_limits<double>::infinity();

  auto homes = init_homes(problem, params, rng);
  result.evaluations = per_iteration;

  std::vector<double> floor(n);
  for (std::size_t i = 0; i < n; ++i) {
    floor[i] = params.interval_floor * (bounds.upper[i] - bounds.lower[i]);
  }

  double reference = std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (int iteration = 1;; ++iteration) {
    // Score bookkeeping for the snails evaluated this round.
    int feasible = 0;
    for (const auto& home : homes) {
      for (const auto& s : home.snails) {
        if (s.feasible) ++feasible;
        if (s.penalized < result.best_penalized) {
          result.best_penalized = s.penalized;
          result.best_objective = s.objective;
          result.best_feasible = s.feasible;
          result.best_position = s.position;
        }
      }
    }
    double widest = 0.0;
    for (const auto& home : homes) {
      for (std::size_t i = 0; i < n; ++i) {
        widest = std::max(widest, home.interval[i] / (bounds.upper[i] - bounds.lower[i]));
      }
    }
    result.iterations = iteration;
    result.trace.push_back({iteration, result.evaluations, result.best_penalized,
                            result.best_objective, result.best_feasible,
                            static_cast<double>(feasible) / static_cast<double>(per_iteration),
                            widest});

    if (result.best_penalized < reference - params.improvement_tolerance ||
        !std::isfinite(reference)) {
      reference = result.best_penalized;
      last_improvement = iteration;
    }

    if (iteration >= params.max_iterations) {
      result.terminated_by = Termination::max_iter;
      break;
    }
    if (result.evaluations + per_iteration > params.max_evaluations) {
      result.terminated_by = Termination::max_eval;
      break;
    }
    if (iteration - last_improvement >= params.stagnation_window) {
      result.terminated_by = Termination::stagnation;
      break;
    }
    const bool floored = std::all_of(homes.begin(), homes.end(), [&](const Home& h) {
      for (std::size_t i = 0; i < n; ++i) {
        if (h.interval[i] > floor[i]) return false;
      }
      return true;
    });
    if (floored) {
      result.terminated_by = Termination::interval_floor;
      break;
    }

    for (auto& home : homes) {
      auto& snails = home.snails;

      // Fecundity and mating probabilities.
      std::vector<double> scores(per_home);
      for (std::size_t s = 0; s < per_home; ++s) {
        snails[s].fecundity = fecundity_index(snails[s].history, rng);
        scores[s] = snails[s].penalized;
      }
      const auto probabilities = selection_probability(scores);

      // Roulette mating; a snail that draws itself twice sits this round out.
      std::vector<std::size_t> mates;
      std::vector<std::size_t> shooters;
      std::vector<double> darts;
      for (std::size_t s = 0; s < per_home; ++s) {
        std::size_t mate = roulette_select(probabilities, rng);
        if (mate == s) mate = roulette_select(probabilities, rng);
        if (mate == s) continue;
        shooters.push_back(s);
        mates.push_back(mate);
        darts.push_back(love_dart(snails[s].fecundity, snails[s].penalized,
                                  snails[mate].penalized, params.epsilon));
      }
      const auto normalized = normalize_love_darts(darts);

      std::vector<std::vector<double>> trail(per_home);
      for (std::size_t s = 0; s < per_home; ++s) trail[s] = snails[s].position;
      for (std::size_t k = 0; k < shooters.size(); ++k) {
        trail[shooters[k]] = update_position(snails[shooters[k]].position,
                                             snails[mates[k]].position, normalized[k], bounds);
      }

      // Homing: re-centre on the best resident, then contract the interval.
      const auto best = std::min_element(snails.begin(), snails.end(), [](const Snail& a, const Snail& b) {
        return a.penalized < b.penalized;
      });
      if (best->penalized < home.best_penalized) {
        home.best_penalized = best->penalized;
        home.center = best->position;
      }
      for (std::size_t i = 0; i < n; ++i) {
        home.interval[i] = std::max(home.interval[i] * params.interval_shrink, floor[i]);
      }

      // New positions: the trail-following point re-sampled within the
      // home's neighbourhood.
      for (std::size_t s = 0; s < per_home; ++s) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double lo = std::max(bounds.lower[i], home.center[i] - home.interval[i]);
          const double hi = std::min(bounds.upper[i], home.center[i] + home.interval[i]);
          x[i] = std::clamp(trail[s][i] + home.interval[i] * unit(rng), lo, hi);
        }
        const Evaluation e = problem.evaluate(x, params.theta);
        snails[s].position = std::move(x);
        snails[s].objective = e.objective;
        snails[s].penalized = e.penalized;
        snails[s].feasible = e.feasible;
        snails[s].record(e.penalized);
      }
    }
    result.evaluations += per_iteration;
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::uint64_t derive_seed(std::uint64_t master, std::size_t run_index) {
  // SplitMix64 finalizer over (master, index).
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(run_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BatchStats summarize(std::span<const RunResult> runs) {
  BatchStats stats;
  stats.runs = static_cast<int>(runs.size());
  if (runs.empty()) return stats;
  stats.best = std::numeric_limits<double>::infinity();
  stats.worst = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  double evals = 0.0;
  double seconds = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double f = runs[i].best_objective;
    if (f < stats.best) {
      stats.best = f;
      stats.best_run = i;
    }
    stats.worst = std::max(stats.worst, f);
    sum += f;
    evals += static_cast<double>(runs[i].evaluations);
    seconds += runs[i].wall_seconds;
    if (runs[i].best_feasible) ++stats.feasible_runs;
  }
  const double count = static_cast<double>(runs.size());
  stats.mean = sum / count;
  stats.mean_evaluations = evals / count;
  stats.mean_wall_seconds = seconds / count;
  if (runs.size() > 1) {
    double squares = 0.0;
    for (const auto& r : runs) squares += (r.best_objective - stats.mean) * (r.best_objective - stats.mean);
    stats.standard_deviation = std::sqrt(squares / (count - 1.0));
  }
  // Keep best <= mean <= worst despite rounding in the sum.
  stats.mean = std::clamp(stats.mean, stats.best, stats.worst);
  return stats;
}

BatchResult batch(const Problem& problem, const Params& params, int num_runs, int threads) {
  if (num_runs < 1) throw std::invalid_argument("batch needs at least one run");
  params.validate();
  BatchResult out;
  out.runs.resize(static_cast<std::size_t>(num_runs));

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, num_runs);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < out.runs.size(); i = next++) {
        Params p = params;
        p.seed = derive_seed(params.seed, i);
        out.runs[i] = run(problem, p);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = out.runs.size();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  out.stats = summarize(out.runs);
  return out;
}

}  // namespace snail::search
