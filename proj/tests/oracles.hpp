// Reference computations written independently of the library, used to
// freeze expected values and to cross-check invariants.

#ifndef SNAIL_TESTS_ORACLES_HPP
#define SNAIL_TESTS_ORACLES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

struct Force {
  double x;
  double f;
};

struct HandStatics {
  double t1, t2;
  double pulley_v, pulley_h;
  double gear_v, gear_h;
  double ra_v, rb_v, ra_h, rb_h;
};

// Belt drive, pulley at 0, gear at 15.9, bearings at 5.9 and 25.9.
inline HandStatics hand_statics(double torque, double ratio) {
  HandStatics s{};
  const double pi = std::numbers::pi;
  s.t2 = torque / (10.0 * (ratio - 1.0));
  s.t1 = ratio * s.t2;
  const double belt = std::atan2(25.0, 10.0);
  s.pulley_v = (s.t1 + s.t2) * std::sin(belt) - 60.0;
  s.pulley_h = -(s.t1 + s.t2) * std::cos(belt);
  const double tangential = torque / 5.0;
  s.gear_v = tangential * std::tan(20.0 * pi / 180.0) - 25.0;
  s.gear_h = -tangential;
  auto react = [](double p, double g, double& ra, double& rb) {
    // Moments about A: p*(0-5.9) + g*(15.9-5.9) + rb*(25.9-5.9) = 0.
    rb = -(p * (0.0 - 5.9) + g * 10.0) / 20.0;
    ra = -(p + g + rb);
  };
  react(s.pulley_v, s.gear_v, s.ra_v, s.rb_v);
  react(s.pulley_h, s.gear_h, s.ra_h, s.rb_h);
  return s;
}

inline std::vector<Force> vertical_forces(const HandStatics& s) {
  return {{0.0, s.pulley_v}, {5.9, s.ra_v}, {15.9, s.gear_v}, {25.9, s.rb_v}};
}

inline std::vector<Force> horizontal_forces(const HandStatics& s) {
  return {{0.0, s.pulley_h}, {5.9, s.ra_h}, {15.9, s.gear_h}, {25.9, s.rb_h}};
}

// Moment at x from the forces to the right of x. Equal to the left-hand sum
// when the system is in equilibrium.
inline double moment_from_right(const std::vector<Force>& forces, double x) {
  double m = 0.0;
  for (const auto& f : forces) {
    if (f.x > x) m += f.f * (f.x - x);
  }
  return m;
}

inline double moment_from_left(const std::vector<Force>& forces, double x) {
  double m = 0.0;
  for (const auto& f : forces) {
    if (f.x < x) m += f.f * (x - f.x);
  }
  return m;
}

// Deflection by Simpson double integration of M/EI on a uniform shaft, with
// y(a) = y(b) = 0 fixed after the fact by removing a linear function.
inline double deflection_simpson(const std::vector<Force>& forces, double a, double b,
                                 double ei, double x, int panels = 40000) {
  const double length = 25.9;
  const double h = length / panels;
  std::vector<double> slope(panels + 1, 0.0);
  std::vector<double> y(panels + 1, 0.0);
  auto curvature = [&](double s) { return moment_from_left(forces, s) / ei; };
  for (int i = 1; i <= panels; ++i) {
    const double s0 = (i - 1) * h;
    const double s1 = i * h;
    const double mid = 0.5 * (s0 + s1);
    slope[i] = slope[i - 1] + h / 6.0 * (curvature(s0) + 4.0 * curvature(mid) + curvature(s1));
  }
  for (int i = 1; i <= panels; ++i) y[i] = y[i - 1] + 0.5 * h * (slope[i - 1] + slope[i]);
  auto raw = [&](double s) {
    const double pos = s / h;
    const int i = std::min(panels - 1, static_cast<int>(pos));
    const double t = pos - i;
    return y[i] * (1.0 - t) + y[i + 1] * t;
  };
  const double ya = raw(a);
  const double yb = raw(b);
  const double k = (yb - ya) / (b - a);
  return raw(x) - (ya + k * (x - a));
}

inline double shaft_weight(double d1, double d2, double d3) {
  return 0.2834 * std::numbers::pi / 4.0 * (5.9 * d1 * d1 + 10.0 * d2 * d2 + 10.0 * d3 * d3);
}

// Required Goodman diameter written out from the bracket form.
inline double goodman_k(double d, double kf, double ma, double mm, double ta, double tm) {
  const double se = 24314.3354 * std::exp(-0.097 * std::log(d));
  const double alt = std::sqrt(std::pow(kf * ma, 2) + 0.75 * std::pow(2.05 * ta, 2)) / se;
  const double mean = std::sqrt(std::pow(kf * mm, 2) + 0.75 * std::pow(2.05 * tm, 2)) / 75000.0;
  return std::cbrt(32.0 * 2.2 / std::numbers::pi * (alt + mean));
}

// Root of d - k(d) by bisection on [0.1, 10].
inline double goodman_root(double kf, double ma, double mm, double ta, double tm) {
  double lo = 0.1;
  double hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - goodman_k(mid, kf, ma, mm, ta, tm) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline double torque_lbin(double hp, double rpm) {
  return hp * 550.0 * 12.0 / (rpm * 2.0 * std::numbers::pi / 60.0);
}

// Small hand-rolled generator helpers for property checks.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle

#endif  // SNAIL_TESTS_ORACLES_HPP
