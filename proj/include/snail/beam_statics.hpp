// Beam statics for a two-support shaft carrying a V-belt pulley and a spur
// gear: belt tensions, component loads, support reactions, bending-moment
// diagrams in two orthogonal planes, and deflection by the Macaulay method
// (closed form) or by direct numerical integration of M/EI.
//
// Sign convention: vertical loads are positive upward, horizontal loads are
// positive along +x. Bending moment at a station is the sum of
// force * (x - position) over every force left of the station. All stored
// loads are net of component weights.

#ifndef SNAIL_BEAM_STATICS_HPP
#define SNAIL_BEAM_STATICS_HPP

#include <array>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snail::beam {

enum class Plane { vertical, horizontal };
enum class PowerLevel { max, min };

const char* to_string(Plane plane);
const char* to_string(PowerLevel level);

/// Raised when a system of equilibrium equations has no unique solution.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an evaluation position or policy does not fit the shaft.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PulleyGeometry {
  double pitch_radius = 10.0;                               // in
  double weight = 60.0;                                     // lb
  double wrap_angle = 7.0 * std::numbers::pi / 6.0;         // rad
  double half_groove_angle = std::numbers::pi / 4.0;        // rad
  double friction = 0.31;
  double resolution_angle_deg = 68.19859051364818;          // atan(25/10)
  // When set, replaces exp(mu * alpha * cosec(beta)) as the tight/slack
  // ratio. The reference load table was produced with the ratio rounded
  // to 5.
  std::optional<double> tension_ratio_override;

  /// exp(mu * alpha / sin(beta)) for a V-belt.
  double exact_tension_ratio() const;
  double tension_ratio() const;
  void validate() const;
};

struct GearGeometry {
  double pitch_radius = 5.0;          // in
  double weight = 25.0;               // lb
  double pressure_angle_deg = 20.0;

  void validate() const;
};

struct BeltTensions {
  double tight = 0.0;  // T1
  double slack = 0.0;  // T2
};

struct PlaneLoads {
  double vertical = 0.0;
  double horizontal = 0.0;
};

struct PointLoad {
  double position = 0.0;   // in, from the left end
  double magnitude = 0.0;  // lb, signed
};

struct LoadCase {
  Plane plane = Plane::vertical;
  PowerLevel power = PowerLevel::max;
  double length = 25.9;
  std::vector<PointLoad> applied;
  std::array<double, 2> supports{5.9, 25.9};
  std::optional<std::array<double, 2>> reactions;

  /// Applied loads followed by the two reactions; requires a solved case.
  std::vector<PointLoad> all_forces() const;
  double force_residual() const;
  double moment_residual_about(double point) const;
};

struct MomentDiagram {
  Plane plane = Plane::vertical;
  PowerLevel power = PowerLevel::max;
  struct Breakpoint {
    double position;
    double moment;
  };
  std::vector<Breakpoint> breakpoints;

  /// Piecewise-linear interpolation between breakpoints.
  double at(double x) const;
};

// -- Loads -------------------------------------------------------------------

/// Tight and slack belt tensions for the torque carried by the pulley.
BeltTensions belt_tensions(double shaft_torque, const PulleyGeometry& pulley);

/// Net vertical and horizontal pulley loads, weight included.
PlaneLoads resolve_pulley_loads(const BeltTensions& tensions,
                                const PulleyGeometry& pulley);

/// Net vertical (radial minus weight) and horizontal (tangential) gear loads.
PlaneLoads gear_loads(double shaft_torque, const GearGeometry& gear);

// -- Reactions and moments -----------------------------------------------------

std::array<double, 2> solve_reactions(const LoadCase& load_case);

/// Copy of the case with its reactions populated.
LoadCase solved(LoadCase load_case);

double bending_moment(const LoadCase& load_case, double x);

/// Shear at x using the left-limit convention.
double shear_force(const LoadCase& load_case, double x);

MomentDiagram moment_diagram(const LoadCase& load_case);

// -- Whole-shaft statics -------------------------------------------------------

struct ShaftLayout {
  PulleyGeometry pulley;
  GearGeometry gear;
  double pulley_position = 0.0;
  double gear_position = 15.9;
  std::array<double, 2> supports{5.9, 25.9};
  double length = 25.9;
  double torque_max = 3500.0;  // lb*in carried by the shaft
  double torque_min = 875.0;
};

struct SectionMoments {
  int section_index = 1;  // 1..3
  double alternating = 0.0;
  double mean = 0.0;
  double eval_position = 0.0;
};

struct EvalPolicy {
  enum class Kind { section_max, paper_mode, explicit_positions };
  Kind kind = Kind::section_max;
  std::array<double, 3> positions{5.9, 15.9, 20.9};

  static EvalPolicy section_max();
  static EvalPolicy paper_mode();
  static EvalPolicy explicit_positions(std::array<double, 3> positions);
};

const char* to_string(EvalPolicy::Kind kind);

/// Four solved load cases (two planes at two power levels) for one layout.
class ShaftStatics {
 public:
  explicit ShaftStatics(const ShaftLayout& layout);

  const ShaftLayout& layout() const { return layout_; }
  const LoadCase& load_case(Plane plane, PowerLevel level) const;
  BeltTensions tensions(PowerLevel level) const;
  PlaneLoads pulley_loads(PowerLevel level) const;
  PlaneLoads gear_loads(PowerLevel level) const;

  double moment(Plane plane, PowerLevel level, double x) const;
  double resultant_moment(double x, PowerLevel level) const;

  /// Largest |force residual| or |moment residual| over all four cases.
  double max_equilibrium_residual() const;

  /// Every load and support position, sorted and deduplicated.
  std::vector<double> breakpoints() const;

  /// Mean and alternating bending moments for one of three sections whose
  /// extents are [bounds[i-1], bounds[i]].
  SectionMoments section_moments(int section_index, const EvalPolicy& policy,
                                 const std::array<double, 4>& bounds) const;

 private:
  static std::size_t index(Plane plane, PowerLevel level);

  ShaftLayout layout_;
  std::array<BeltTensions, 2> tensions_{};
  std::array<PlaneLoads, 2> pulley_{};
  std::array<PlaneLoads, 2> gear_{};
  std::array<LoadCase, 4> cases_;
};

// -- Deflection ----------------------------------------------------------------

/// Single-rigidity Macaulay solution
///   EI y = sum F <x - a>^3 / 6 + C1 x + C2
/// with C1, C2 fixed by y = 0 at both supports.
struct DeflectionSolution {
  double c1 = 0.0;
  double c2 = 0.0;
  double rigidity = 0.0;  // EI, lb*in^2
  std::vector<PointLoad> forces;

  double operator()(double x) const;
};

DeflectionSolution macaulay_deflection(std::span<const PointLoad> forces,
                                       const std::array<double, 2>& supports,
                                       double elastic_modulus,
                                       double effective_diameter);

double deflection_closed_form(double x, std::span<const PointLoad> forces,
                              const std::array<double, 2>& supports,
                              double elastic_modulus,
                              double effective_diameter);

/// Stepped-shaft deflection from double trapezoidal integration of
/// M(x) / (E I(x)) with a per-section second moment of area.
class PiecewiseDeflection {
 public:
  static constexpr int kDefaultStations = 20000;

  PiecewiseDeflection(std::span<const PointLoad> forces,
                      const std::array<double, 2>& supports,
                      double elastic_modulus,
                      const std::array<double, 3>& diameters,
                      const std::array<double, 4>& section_bounds,
                      int stations = kDefaultStations);

  double operator()(double x) const;
  std::size_t station_count() const { return x_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

double deflection_numeric(double x, std::span<const PointLoad> forces,
                          const std::array<double, 2>& supports,
                          double elastic_modulus,
                          const std::array<double, 3>& diameters,
                          const std::array<double, 4>& section_bounds,
                          int stations = PiecewiseDeflection::kDefaultStations);

double second_moment_of_area(double diameter);

}  // namespace snail::beam

#endif  // SNAIL_BEAM_STATICS_HPP
