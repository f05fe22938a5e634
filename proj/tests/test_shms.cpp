#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "snail/shms.hpp"

using namespace snail::search;

namespace {

class Sphere : public Problem {
 public:
  explicit Sphere(std::size_t n = 3, double half = 5.0) : n_(n), half_(half) {}
  Bounds bounds() const override {
    return {std::vector<double>(n_, -half_), std::vector<double>(n_, half_)};
  }
  Evaluation evaluate(std::span<const double> x, double) const override {
    double s = 0.0;
    for (double v : x) s += v * v;
    return {s, s, true};
  }

 private:
  std::size_t n_;
  double half_;
};

// min x + y subject to x*y >= 1 on [0.1, 4]^2; optimum at (1, 1).
class Hyperbola : public Problem {
 public:
  Bounds bounds() const override { return {{0.1, 0.1}, {4.0, 4.0}}; }
  Evaluation evaluate(std::span<const double> x, double theta) const override {
    const double f = x[0] + x[1];
    const double v = std::max(0.0, 1.0 - x[0] * x[1]);
    const bool ok = v <= 1e-6;
    return {f, ok ? f : f + theta * v, ok};
  }
};

// Shifted so that every value is negative.
class NegativeBowl : public Problem {
 public:
  Bounds bounds() const override { return {{-2.0, -2.0}, {2.0, 2.0}}; }
  Evaluation evaluate(std::span<const double> x, double) const override {
    const double f = x[0] * x[0] + x[1] * x[1] - 100.0;
    return {f, f, true};
  }
};

bool same(const RunResult& a, const RunResult& b) {
  if (a.best_position != b.best_position || a.best_penalized != b.best_penalized ||
      a.best_objective != b.best_objective || a.evaluations != b.evaluations ||
      a.iterations != b.iterations || a.terminated_by != b.terminated_by ||
      a.trace.size() != b.trace.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (a.trace[i].best_penalized != b.trace[i].best_penalized) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("shms") {

TEST_CASE("fecundity index") {
  Rng rng(1);
  const std::vector<double> h{10.0, 8.0, 7.0};
  CHECK(fecundity_index(h, rng) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int i = 0; i < 100; ++i) {
    const double zero_denominator = fecundity_index(std::vector<double>{5.0, 9.0, 5.0}, rng);
    CHECK(zero_denominator > 0.0);
    CHECK(zero_denominator < 1.0);
    const double single = fecundity_index(std::vector<double>{5.0}, rng);
    CHECK(single > 0.0);
    CHECK(single < 1.0);
    const double flat = fecundity_index(std::vector<double>{5.0, 7.0, 7.0}, rng);
    CHECK(flat > 0.0);
    CHECK(flat < 1.0);
  }
  // Only the three most recent values count.
  CHECK(fecundity_index(std::vector<double>{99.0, 10.0, 8.0, 7.0}, rng) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("selection probabilities") {
  const auto equal = selection_probability(std::vector<double>{4.0, 4.0, 4.0, 4.0});
  for (double p : equal) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  const auto two = selection_probability(std::vector<double>{1.0, 3.0});
  CHECK(two[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(0.25).epsilon(1e-15));

  oracle::Gen gen(13);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> f(static_cast<std::size_t>(gen.integer(1, 40)));
    const bool shifted = gen.integer(0, 3) == 0;
    for (double& v : f) v = shifted ? gen.uniform(-1e3, 1e3) : gen.uniform(1e-3, 1e6);
    const auto p = selection_probability(f);
    double total = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    const auto lo = std::min_element(f.begin(), f.end()) - f.begin();
    CHECK(p[lo] == *std::max_element(p.begin(), p.end()));
  }
}

TEST_CASE("roulette selection") {
  Rng rng(7);
  const std::vector<double> degenerate{1.0, 0.0, 0.0};
  for (int i = 0; i < 1000; ++i) CHECK(roulette_select(degenerate, rng) == 0);
  const std::vector<double> tail{0.0, 0.0, 1.0};
  for (int i = 0; i < 1000; ++i) CHECK(roulette_select(tail, rng) == 2);

  const std::vector<double> uniform(4, 0.25);
  std::array<int, 4> counts{};
  for (int i = 0; i < 100000; ++i) ++counts[roulette_select(uniform, rng)];
  for (int c : counts) CHECK(std::abs(c / 1e5 - 0.25) < 0.01);

  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 100; ++i) CHECK(roulette_select(uniform, a) == roulette_select(uniform, b));
  CHECK_THROWS(roulette_select(std::vector<double>{}, rng));
}

TEST_CASE("love dart") {
  CHECK(love_dart(0.5, 20.0, 10.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(std::abs(love_dart(0.5, 10.0, 10.0)) <= 1e12);
  CHECK(std::abs(love_dart(0.0, 12.0, 10.0)) <= 1e12);
  CHECK(std::isfinite(love_dart(0.0, 10.0, 10.0)));
  CHECK(std::abs(love_dart(0.5, 30.0, 10.0)) < std::abs(love_dart(0.5, 20.0, 10.0)));
  CHECK(love_dart(0.5, 10.0, 20.0) == doctest::Approx(-0.2));
}

TEST_CASE("love dart normalization") {
  const auto n = normalize_love_darts(std::vector<double>{2.0, 4.0, 6.0});
  CHECK(n == std::vector<double>{0.0, 0.5, 1.0});
  const auto flat = normalize_love_darts(std::vector<double>{3.0, 3.0, 3.0});
  CHECK(flat == std::vector<double>{0.5, 0.5, 0.5});
  const auto single = normalize_love_darts(std::vector<double>{-7.0});
  CHECK(single == std::vector<double>{0.5});
  const auto extremes = normalize_love_darts(std::vector<double>{5.0, -1e12, 1e12, 0.0});
  CHECK(extremes[1] == 0.0);
  CHECK(extremes[2] == 1.0);
}

TEST_CASE("position update") {
  const Bounds b{{-10.0}, {10.0}};
  CHECK(update_position(std::vector<double>{4.0}, std::vector<double>{2.0}, 0.0, b) == std::vector<double>{4.0});
  CHECK(update_position(std::vector<double>{4.0}, std::vector<double>{2.0}, 1.0, b) == std::vector<double>{2.0});
  CHECK(update_position(std::vector<double>{4.0}, std::vector<double>{2.0}, 0.5, b) == std::vector<double>{3.0});
  const Bounds b3{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  const auto moved = update_position(std::vector<double>{0.2, 0.4, 0.9}, std::vector<double>{0.6, 0.0, 0.1}, 0.25, b3);
  CHECK(moved[0] == doctest::Approx(0.3));
  CHECK(moved[1] == doctest::Approx(0.3));
  CHECK(moved[2] == doctest::Approx(0.7));
}

TEST_CASE("homes and spawning") {
  const Sphere sphere;
  Params params;
  Rng rng(params.seed);
  const auto homes = init_homes(sphere, params, rng);
  CHECK(homes.size() == 3);
  std::size_t total = 0;
  for (const auto& h : homes) {
    total += h.snails.size();
    for (const auto& s : h.snails) {
      CHECK(sphere.bounds().contains(s.position));
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(s.position[i] - h.center[i]) <= h.interval[i] + 1e-12);
      }
    }
  }
  CHECK(total == 30);

  Rng again(params.seed);
  const auto twin = init_homes(sphere, params, again);
  for (std::size_t h = 0; h < homes.size(); ++h) {
    CHECK(homes[h].center == twin[h].center);
    for (std::size_t s = 0; s < homes[h].snails.size(); ++s) {
      CHECK(homes[h].snails[s].position == twin[h].snails[s].position);
    }
  }

  const std::vector<double> center{1.0, -1.0, 0.5};
  const std::vector<double> tiny(3, 1e-15);
  const auto clustered = spawn_snails(sphere, center, tiny, 2, sphere.bounds(), 1.0, rng);
  CHECK(clustered.size() == 2);
  for (const auto& s : clustered) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.position[i] == doctest::Approx(center[i]).epsilon(1e-12));
  }

  // Spawning next to a wall clips into the box.
  const std::vector<double> corner{5.0, 5.0, -5.0};
  const std::vector<double> wide(3, 3.0);
  for (const auto& s : spawn_snails(sphere, corner, wide, 50, sphere.bounds(), 1.0, rng)) {
    CHECK(sphere.bounds().contains(s.position));
  }
}

TEST_CASE("degenerate bounds and bad parameters are rejected") {
  class Flat : public Sphere {
    Bounds bounds() const override { return {{0.0, 1.0}, {1.0, 1.0}}; }
  };
  Params params;
  Rng rng(1);
  CHECK_THROWS(init_homes(Flat{}, params, rng));
  Params p = params;
  p.snails_per_home = 1;
  CHECK_THROWS(p.validate());
  p = params;
  p.interval_shrink = 1.0;
  CHECK_THROWS(p.validate());
  p = params;
  p.initial_interval = 0.0;
  CHECK_THROWS(p.validate());
  p = params;
  p.theta = 0.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("sphere smoke test") {
  const Sphere sphere;
  Params params;
  params.max_iterations = 1000;
  params.max_evaluations = 5000;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    params.seed = seed;
    const auto r = run(sphere, params);
    CHECK(r.evaluations <= 5000);
    CHECK(r.best_objective < 1e-3);
  }
}

TEST_CASE("determinism under a fixed seed") {
  const Hyperbola problem;
  Params params;
  params.seed = 4242;
  CHECK(same(run(problem, params), run(problem, params)));
  params.seed = 4243;
  const auto other = run(problem, params);
  params.seed = 4242;
  CHECK_FALSE(same(run(problem, params), other));
}

TEST_CASE("elitism, containment and interval contraction") {
  const Hyperbola problem;
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    Params params;
    params.seed = seed;
    const auto r = run(problem, params);
    REQUIRE(!r.trace.empty());
    CHECK(r.trace.size() == static_cast<std::size_t>(r.iterations));
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      CHECK(r.trace[i].best_penalized <= r.trace[i - 1].best_penalized);
      CHECK(r.trace[i].evaluations == r.trace[i - 1].evaluations + 30);
    }
    CHECK(problem.bounds().contains(r.best_position));
    for (const auto& t : r.trace) {
      const double expected = params.initial_interval * std::pow(params.interval_shrink, t.iteration - 1);
      if (expected > params.interval_floor) CHECK(t.interval == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(r.trace.back().best_penalized == r.best_penalized);
  }
}

TEST_CASE("every evaluated point stays inside the bounds") {
  class Watch : public Problem {
   public:
    mutable long outside = 0;
    mutable long calls = 0;
    Bounds bounds() const override { return {{0.0, -1.0, 10.0}, {0.5, 1.0, 10.001}}; }
    Evaluation evaluate(std::span<const double> x, double) const override {
      ++calls;
      if (!bounds().contains(x)) ++outside;
      const double f = std::abs(x[0] - 0.5) + x[1] * x[1] + x[2];
      return {f, f, true};
    }
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Watch w;
    Params params;
    params.seed = seed;
    params.initial_interval = 1.0;
    const auto r = run(w, params);
    CHECK(w.outside == 0);
    CHECK(w.calls == r.evaluations);
  }
}

TEST_CASE("termination reasons") {
  const Sphere sphere;
  Params params;
  params.max_iterations = 7;
  auto r = run(sphere, params);
  CHECK(r.terminated_by == Termination::max_iter);
  CHECK(r.iterations == 7);

  params = Params{};
  params.max_evaluations = 100;
  r = run(sphere, params);
  CHECK(r.terminated_by == Termination::max_eval);
  CHECK(r.evaluations <= 100);

  class Constant : public Sphere {
    Evaluation evaluate(std::span<const double>, double) const override { return {1.0, 1.0, true}; }
  };
  params = Params{};
  params.stagnation_window = 4;
  r = run(Constant{}, params);
  CHECK(r.terminated_by == Termination::stagnation);
  CHECK(r.iterations == 5);

  params = Params{};
  params.max_iterations = 10000;
  params.stagnation_window = 10000;
  params.max_evaluations = 10000000;
  params.interval_shrink = 0.5;
  params.interval_floor = 1e-3;
  r = run(sphere, params);
  CHECK(r.terminated_by == Termination::interval_floor);
}

TEST_CASE("negative objectives are handled") {
  const NegativeBowl bowl;
  Params params;
  params.max_iterations = 200;
  const auto r = run(bowl, params);
  CHECK(r.best_objective < -99.99);
}

TEST_CASE("penalty drives the population toward feasibility") {
  const Hyperbola problem;
  double first = 0.0;
  double last = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Params params;
    params.seed = seed;
    const auto r = run(problem, params);
    first += r.trace.front().feasible_fraction;
    last += r.trace.back().feasible_fraction;
    CHECK(r.best_feasible);
    CHECK(r.best_objective == doctest::Approx(2.0).epsilon(5e-2));
  }
  CHECK(last >= first);
}

TEST_CASE("derived seeds are distinct and reproducible") {
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 1000; ++i) seeds.push_back(derive_seed(20240917, i));
  auto sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK(derive_seed(20240917, 5) == seeds[5]);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("batch statistics") {
  const Hyperbola problem;
  Params params;
  const auto one = batch(problem, params, 1, 1);
  CHECK(one.stats.runs == 1);
  CHECK(one.stats.best == one.stats.worst);
  CHECK(one.stats.best == one.stats.mean);
  CHECK(one.stats.standard_deviation == 0.0);

  const auto serial = batch(problem, params, 12, 1);
  const auto parallel = batch(problem, params, 12, 4);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(same(serial.runs[i], parallel.runs[i]));
    CHECK(serial.runs[i].seed == derive_seed(params.seed, i));
  }
  const auto& s = serial.stats;
  CHECK(s.best == parallel.stats.best);
  CHECK(s.mean == parallel.stats.mean);
  CHECK(s.standard_deviation == parallel.stats.standard_deviation);
  CHECK(s.best <= s.mean);
  CHECK(s.mean <= s.worst);
  CHECK(s.standard_deviation >= 0.0);

  std::vector<double> finals;
  for (const auto& r : serial.runs) finals.push_back(r.best_objective);
  const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / 12.0;
  double ss = 0.0;
  for (double f : finals) ss += (f - mean) * (f - mean);
  CHECK(s.standard_deviation == doctest::Approx(std::sqrt(ss / 11.0)));
  CHECK(s.mean_evaluations > 0.0);

  // Aggregation does not depend on the order of the runs.
  auto reversed = serial.runs;
  std::reverse(reversed.begin(), reversed.end());
  const auto back = summarize(reversed);
  CHECK(back.best == s.best);
  CHECK(back.worst == s.worst);
  CHECK(back.mean == doctest::Approx(s.mean).epsilon(1e-14));
  CHECK(back.standard_deviation == doctest::Approx(s.standard_deviation).epsilon(1e-12));

  CHECK_THROWS(batch(problem, params, 0));
}

TEST_CASE("a failing evaluation in a worker surfaces to the caller") {
  class Broken : public Sphere {
    Evaluation evaluate(std::span<const double>, double) const override {
      throw std::runtime_error("boom");
    }
  };
  CHECK_THROWS_WITH(batch(Broken{}, Params{}, 4, 3), "boom");
}

}
