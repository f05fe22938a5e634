#include "snail/beam_statics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace snail::beam {

namespace {

constexpr double kPositionSlack = 1e-9;

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

double ramp_cubed(double x, double offset) {
  if (x < offset) return 0.0;
  const double r = x - offset;
  return r * r * r;
}

void check_station(double x, double length) {
  if (!(x >= -kPositionSlack && x <= length + kPositionSlack)) {
    throw std::domain_error(
        fmt::format("station x = {} lies outside the shaft [0, {}]", x, length));
  }
}

double moment_of(std::span<const PointLoad> forces, double x) {
  double m = 0.0;
  for (const auto& f : forces) {
    if (f.position < x) m += f.magnitude * (x - f.position);
  }
  return m;
}

}  // namespace

const char* to_string(Plane plane) {
  return plane == Plane::vertical ? "vertical" : "horizontal";
}

const char* to_string(PowerLevel level) {
  return level == PowerLevel::max ? "max" : "min";
}

const char* to_string(EvalPolicy::Kind kind) {
  switch (kind) {
    case EvalPolicy::Kind::section_max: return "section-max";
    case EvalPolicy::Kind::paper_mode: return "paper-mode";
    case EvalPolicy::Kind::explicit_positions: return "explicit";
  }
  return "?";
}

double PulleyGeometry::exact_tension_ratio() const {
  return std::exp(friction * wrap_angle / std::sin(half_groove_angle));
}

double PulleyGeometry::tension_ratio() const {
  return tension_ratio_override ? *tension_ratio_override : exact_tension_ratio();
}

void PulleyGeometry::validate() const {
  if (!(pitch_radius > 0.0)) {
    throw std::domain_error("pulley pitch radius must be positive");
  }
  if (!(friction > 0.0)) throw std::domain_error("belt friction must be positive");
  if (!(wrap_angle > 0.0)) throw std::domain_error("wrap angle must be positive");
  if (!(half_groove_angle > 0.0 && half_groove_angle < std::numbers::pi / 2)) {
    throw std::domain_error("half groove angle must lie in (0, pi/2)");
  }
  if (tension_ratio_override && !(*tension_ratio_override > 1.0)) {
    throw std::domain_error("belt tension ratio must exceed 1");
  }
}

void GearGeometry::validate() const {
  if (!(pitch_radius > 0.0)) {
    throw std::domain_error("gear pitch radius must be positive");
  }
  if (!(pressure_angle_deg > 0.0 && pressure_angle_deg < 45.0)) {
    throw std::domain_error("pressure angle must lie in (0, 45) degrees");
  }
}

BeltTensions belt_tensions(double shaft_torque, const PulleyGeometry& pulley) {
  pulley.validate();
  if (shaft_torque < 0.0) throw std::domain_error("shaft torque must be >= 0");
  // T1 / T2 = ratio and T1 - T2 = torque / radius.
  const double ratio = pulley.tension_ratio();
  const double difference = shaft_torque / pulley.pitch_radius;
  const double slack = difference / (ratio - 1.0);
  return {slack * ratio, slack};
}

PlaneLoads resolve_pulley_loads(const BeltTensions& tensions,
                                const PulleyGeometry& pulley) {
  const double total = tensions.tight + tensions.slack;
  const double angle = deg_to_rad(pulley.resolution_angle_deg);
  return {total * std::sin(angle) - pulley.weight, -total * std::cos(angle)};
}

PlaneLoads gear_loads(double shaft_torque, const GearGeometry& gear) {
  gear.validate();
  if (shaft_torque < 0.0) throw std::domain_error("shaft torque must be >= 0");
  const double tangential = shaft_torque / gear.pitch_radius;
  const double radial = tangential * std::tan(deg_to_rad(gear.pressure_angle_deg));
  return {radial - gear.weight, -tangential};
}

std::vector<PointLoad> LoadCase::all_forces() const {
  if (!reactions) throw std::logic_error("load case has no solved reactions");
  std::vector<PointLoad> forces = applied;
  forces.push_back({supports[0], (*reactions)[0]});
  forces.push_back({supports[1], (*reactions)[1]});
  return forces;
}

double LoadCase::force_residual() const {
  double sum = 0.0;
  for (const auto& f : all_forces()) sum += f.magnitude;
  return sum;
}

double LoadCase::moment_residual_about(double point) const {
  double sum = 0.0;
  for (const auto& f : all_forces()) sum += f.magnitude * (f.position - point);
  return sum;
}

std::array<double, 2> solve_reactions(const LoadCase& load_case) {
  const auto [a, b] = load_case.supports;
  if (load_case.applied.empty()) {
    throw std::invalid_argument("load case has no applied loads");
  }
  // [1 1; a b] [RA RB]^T = [-sum P; -sum P p]
  const double det = b - a;
  if (std::abs(det) < 1e-12) {
    throw SingularSystemError(
        fmt::format("supports coincide at x = {}; reactions are indeterminate", a));
  }
  double force = 0.0;
  double moment = 0.0;
  for (const auto& p : load_case.applied) {
    force += p.magnitude;
    moment += p.magnitude * p.position;
  }
  const double ra = (-force * b + moment) / det;
  const double rb = (-moment + force * a) / det;
  return {ra, rb};
}

LoadCase solved(LoadCase load_case) {
  load_case.reactions = solve_reactions(load_case);
  return load_case;
}

double bending_moment(const LoadCase& load_case, double x) {
  check_station(x, load_case.length);
  const auto forces = load_case.all_forces();
  return moment_of(forces, x);
}

double shear_force(const LoadCase& load_case, double x) {
  check_station(x, load_case.length);
  double v = 0.0;
  for (const auto& f : load_case.all_forces()) {
    if (f.position < x) v += f.magnitude;
  }
  return v;
}

double MomentDiagram::at(double x) const {
  if (breakpoints.empty()) return 0.0;
  if (x <= breakpoints.front().position) return breakpoints.front().moment;
  if (x >= breakpoints.back().position) return breakpoints.back().moment;
  auto hi = std::upper_bound(
      breakpoints.begin(), breakpoints.end(), x,
      [](double v, const Breakpoint& b) { return v < b.position; });
  auto lo = hi - 1;
  const double t = (x - lo->position) / (hi->position - lo->position);
  return lo->moment + t * (hi->moment - lo->moment);
}

MomentDiagram moment_diagram(const LoadCase& load_case) {
  MomentDiagram diagram{load_case.plane, load_case.power, {}};
  std::vector<double> xs{0.0, load_case.length};
  for (const auto& f : load_case.all_forces()) xs.push_back(f.position);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) diagram.breakpoints.push_back({x, bending_moment(load_case, x)});
  return diagram;
}

EvalPolicy EvalPolicy::section_max() { return {}; }

EvalPolicy EvalPolicy::paper_mode() {
  return {Kind::paper_mode, {5.9, 15.9, 20.9}};
}

EvalPolicy EvalPolicy::explicit_positions(std::array<double, 3> positions) {
  return {Kind::explicit_positions, positions};
}

ShaftStatics::ShaftStatics(const ShaftLayout& layout) : layout_(layout) {
  for (PowerLevel level : {PowerLevel::max, PowerLevel::min}) {
    const std::size_t i = level == PowerLevel::max ? 0 : 1;
    const double torque = level == PowerLevel::max ? layout.torque_max : layout.torque_min;
    tensions_[i] = belt_tensions(torque, layout.pulley);
    pulley_[i] = resolve_pulley_loads(tensions_[i], layout.pulley);
    gear_[i] = beam::gear_loads(torque, layout.gear);

    for (Plane plane : {Plane::vertical, Plane::horizontal}) {
      const bool vertical = plane == Plane::vertical;
      LoadCase c;
      c.plane = plane;
      c.power = level;
      c.length = layout.length;
      c.supports = layout.supports;
      c.applied = {
          {layout.pulley_position, vertical ? pulley_[i].vertical : pulley_[i].horizontal},
          {layout.gear_position, vertical ? gear_[i].vertical : gear_[i].horizontal},
      };
      cases_[index(plane, level)] = solved(std::move(c));
    }
  }
}

std::size_t ShaftStatics::index(Plane plane, PowerLevel level) {
  return (level == PowerLevel::max ? 0 : 2) + (plane == Plane::vertical ? 0 : 1);
}

const LoadCase& ShaftStatics::load_case(Plane plane, PowerLevel level) const {
  return cases_[index(plane, level)];
}

BeltTensions ShaftStatics::tensions(PowerLevel level) const {
  return tensions_[level == PowerLevel::max ? 0 : 1];
}

PlaneLoads ShaftStatics::pulley_loads(PowerLevel level) const {
  return pulley_[level == PowerLevel::max ? 0 : 1];
}

PlaneLoads ShaftStatics::gear_loads(PowerLevel level) const {
  return gear_[level == PowerLevel::max ? 0 : 1];
}

double ShaftStatics::moment(Plane plane, PowerLevel level, double x) const {
  return bending_moment(load_case(plane, level), x);
}

double ShaftStatics::resultant_moment(double x, PowerLevel level) const {
  return std::hypot(moment(Plane::vertical, level, x),
                    moment(Plane::horizontal, level, x));
}

double ShaftStatics::max_equilibrium_residual() const {
  double worst = 0.0;
  for (const auto& c : cases_) {
    worst = std::max(worst, std::abs(c.force_residual()));
    for (double s : c.supports) {
      worst = std::max(worst, std::abs(c.moment_residual_about(s)));
    }
  }
  return worst;
}

std::vector<double> ShaftStatics::breakpoints() const {
  std::vector<double> xs{0.0, layout_.length};
  for (const auto& c : cases_) {
    for (const auto& f : c.all_forces()) xs.push_back(f.position);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

SectionMoments ShaftStatics::section_moments(int section_index, const EvalPolicy& policy,
                                             const std::array<double, 4>& bounds) const {
  if (section_index < 1 || section_index > 3) {
    throw ConfigurationError(fmt::format("section index {} is not in 1..3", section_index));
  }
  const double lo = bounds[section_index - 1];
  const double hi = bounds[section_index];

  double x = 0.0;
  if (policy.kind == EvalPolicy::Kind::section_max) {
    // The resultant is convex between breakpoints, so its maximum over a
    // section sits on a breakpoint or a section end.
    std::vector<double> candidates{lo, hi};
    for (double b : breakpoints()) {
      if (b > lo && b < hi) candidates.push_back(b);
    }
    std::sort(candidates.begin(), candidates.end());
    double best = -1.0;
    for (double c : candidates) {
      const double r = resultant_moment(c, PowerLevel::max);
      if (r > best) {
        best = r;
        x = c;
      }
    }
  } else {
    x = policy.positions[section_index - 1];
    if (!(x >= lo - kPositionSlack && x <= hi + kPositionSlack)) {
      throw ConfigurationError(fmt::format(
          "evaluation position {} for section {} lies outside its span [{}, {}]", x,
          section_index, lo, hi));
    }
  }

  const double at_max = resultant_moment(x, PowerLevel::max);
  const double at_min = resultant_moment(x, PowerLevel::min);
  return {section_index, std::abs(at_max - at_min) / 2.0, (at_max + at_min) / 2.0, x};
}

// -- Deflection ----------------------------------------------------------------

double second_moment_of_area(double diameter) {
  const double d2 = diameter * diameter;
  return std::numbers::pi * d2 * d2 / 64.0;
}

double DeflectionSolution::operator()(double x) const {
  double phi = 0.0;
  for (const auto& f : forces) phi += f.magnitude * ramp_cubed(x, f.position) / 6.0;
  return (phi + c1 * x + c2) / rigidity;
}

DeflectionSolution macaulay_deflection(std::span<const PointLoad> forces,
                                       const std::array<double, 2>& supports,
                                       double elastic_modulus,
                                       double effective_diameter) {
  if (!(effective_diameter > 0.0)) {
    throw std::domain_error("effective diameter must be positive");
  }
  if (!(elastic_modulus > 0.0)) throw std::domain_error("elastic modulus must be positive");
  const auto [a, b] = supports;
  if (std::abs(b - a) < 1e-12) throw SingularSystemError("supports coincide");

  DeflectionSolution sol;
  sol.forces.assign(forces.begin(), forces.end());
  sol.rigidity = elastic_modulus * second_moment_of_area(effective_diameter);

  auto phi = [&](double x) {
    double s = 0.0;
    for (const auto& f : forces) s += f.magnitude * ramp_cubed(x, f.position) / 6.0;
    return s;
  };
  // [a 1; b 1] [C1 C2]^T = [-phi(a); -phi(b)]
  const double pa = phi(a);
  const double pb = phi(b);
  sol.c1 = -(pb - pa) / (b - a);
  sol.c2 = -pa - sol.c1 * a;
  return sol;
}

double deflection_closed_form(double x, std::span<const PointLoad> forces,
                              const std::array<double, 2>& supports,
                              double elastic_modulus, double effective_diameter) {
  return macaulay_deflection(forces, supports, elastic_modulus, effective_diameter)(x);
}

PiecewiseDeflection::PiecewiseDeflection(std::span<const PointLoad> forces,
                                         const std::array<double, 2>& supports,
                                         double elastic_modulus,
                                         const std::array<double, 3>& diameters,
                                         const std::array<double, 4>& section_bounds,
                                         int stations) {
  for (double d : diameters) {
    if (!(d > 0.0)) throw std::domain_error("section diameters must be positive");
  }
  const double start = section_bounds[0];
  const double end = section_bounds[3];
  const double length = end - start;

  std::vector<double> knots(section_bounds.begin(), section_bounds.end());
  knots.push_back(supports[0]);
  knots.push_back(supports[1]);
  for (const auto& f : forces) knots.push_back(f.position);
  std::erase_if(knots, [&](double k) { return k < start || k > end; });
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::array<double, 3> rigidity{};
  for (int i = 0; i < 3; ++i) {
    rigidity[i] = elastic_modulus * second_moment_of_area(diameters[i]);
  }
  auto section_of = [&](double mid) {
    if (mid < section_bounds[1]) return 0;
    if (mid < section_bounds[2]) return 1;
    return 2;
  };

  std::vector<double> slope_acc{0.0};
  std::vector<double> y_acc{0.0};
  x_.assign(1, knots.front());
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const int n = std::max(1, static_cast<int>(std::lround(stations * (b - a) / length)));
    const double h = (b - a) / n;
    const double ei = rigidity[section_of(0.5 * (a + b))];
    double x_prev = a;
    double kappa_prev = moment_of(forces, a) / ei;
    for (int i = 1; i <= n; ++i) {
      const double x = i == n ? b : a + i * h;
      const double kappa = moment_of(forces, x) / ei;
      const double slope = slope_acc.back() + 0.5 * (x - x_prev) * (kappa_prev + kappa);
      const double y = y_acc.back() + 0.5 * (x - x_prev) * (slope_acc.back() + slope);
      slope_acc.push_back(slope);
      y_acc.push_back(y);
      x_.push_back(x);
      x_prev = x;
      kappa_prev = kappa;
    }
  }

  auto node_value = [&](double x) {
    auto it = std::lower_bound(x_.begin(), x_.end(), x - 1e-12);
    return y_acc[static_cast<std::size_t>(it - x_.begin())];
  };
  const auto [sa, sb] = supports;
  if (std::abs(sb - sa) < 1e-12) throw SingularSystemError("supports coincide");
  const double ya = node_value(sa);
  const double yb = node_value(sb);
  const double c1 = -(yb - ya) / (sb - sa);
  const double c2 = -ya - c1 * sa;
  y_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) y_[i] = y_acc[i] + c1 * x_[i] + c2;
}

double PiecewiseDeflection::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  auto hi = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t j = static_cast<std::size_t>(hi - x_.begin());
  const double t = (x - x_[j - 1]) / (x_[j] - x_[j - 1]);
  return y_[j - 1] + t * (y_[j] - y_[j - 1]);
}

double deflection_numeric(double x, std::span<const PointLoad> forces,
                          const std::array<double, 2>& supports, double elastic_modulus,
                          const std::array<double, 3>& diameters,
                          const std::array<double, 4>& section_bounds, int stations) {
  return PiecewiseDeflection(forces, supports, elastic_modulus, diameters, section_bounds,
                             stations)(x);
}

}  // namespace snail::beam
