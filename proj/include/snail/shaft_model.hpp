// Minimum-weight stepped shaft: weight objective, Modified Goodman design
// diameter per section, step-gap and deflection constraints, and the
// static-penalty pseudo-objective.

#ifndef SNAIL_SHAFT_MODEL_HPP
#define SNAIL_SHAFT_MODEL_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "snail/beam_statics.hpp"

namespace snail::shaft {

using beam::SectionMoments;

/// Section diameters d1, d2, d3 in inches.
struct DesignVector {
  std::array<double, 3> d{};

  double& operator[](std::size_t i) { return d[i]; }
  double operator[](std::size_t i) const { return d[i]; }
  friend bool operator==(const DesignVector&, const DesignVector&) = default;
};

/// Geometry, material and fatigue constants of the shaft (AISI 1040 CD).
struct ShaftSpec {
  std::array<double, 3> section_lengths{5.9, 10.0, 10.0};  // in
  double density = 0.2834;                                 // lb/in^3
  double elastic_modulus = 29e6;                           // psi
  double ultimate_strength = 75000.0;                      // psi
  double yield_strength = 70300.0;                         // psi, stored only
  double safety_factor = 2.2;
  double endurance_coefficient = 24314.3354;  // S_e = coeff * d^exponent
  double endurance_exponent = -0.097;
  std::array<double, 3> kf_bending{2.05, 3.0, 2.4};  // K_f = K_fm per section
  double kf_torsion_alt = 2.05;                      // K_fs
  double kf_torsion_mean = 2.05;                     // K_fsm
  double deflection_limit = 0.005;                   // in
  double step_gap = 0.0787;                          // in
  double lower_bound = 0.5;
  double upper_bound = 3.0;

  double total_length() const;
  std::array<double, 4> section_bounds() const;
  void validate() const;
};

struct TorqueSpec {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double alt = 0.0;
};

/// Shaft torque in lb*in for power in hp (1 hp = 6600 lbf*in/s) at speed in RPM.
double torque_from_power(double power_hp, double speed_rpm);

TorqueSpec mean_alt_torque(double torque_max, double torque_min);

double endurance_limit(double diameter, const ShaftSpec& spec = {});

/// Diameter k(d) demanded by the Modified Goodman line for one section, with
/// the endurance limit evaluated at the candidate diameter.
double goodman_required_diameter(int section_index, const SectionMoments& moments,
                                 const TorqueSpec& torques, const ShaftSpec& spec,
                                 double d_candidate);

struct FixedPoint {
  double diameter = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Iterates d <- k(d) until successive values agree to `tolerance`.
FixedPoint goodman_fixed_point(int section_index, const SectionMoments& moments,
                               const TorqueSpec& torques, const ShaftSpec& spec,
                               double start = 1.0, double tolerance = 1e-9,
                               int max_iterations = 100);

double weight(const DesignVector& d, const ShaftSpec& spec);

inline constexpr std::size_t kConstraintCount = 6;
using ConstraintToggles = std::array<bool, kConstraintCount>;

struct ConstraintReport {
  std::array<double, 3> required{};              // k(d_j)
  std::array<double, kConstraintCount> signed_values{};  // g_j, positive = violated
  std::array<double, kConstraintCount> violations{};     // max(0, g_j) if enabled
  ConstraintToggles enabled{true, true, true, true, true, true};
  double deflection = 0.0;  // signed y at the check station
  bool feasible = false;
  double penalty = 0.0;

  double total_violation() const;
};

using DeflectionFn = std::function<double(const DesignVector&)>;

struct ConstraintOptions {
  ConstraintToggles enabled{true, true, true, true, true, true};
  double tolerance = 1e-6;
};

ConstraintReport evaluate_constraints(const DesignVector& d,
                                      const std::array<SectionMoments, 3>& moments,
                                      const TorqueSpec& torques, const ShaftSpec& spec,
                                      const DeflectionFn& deflection,
                                      const ConstraintOptions& options = {});

/// W + theta * sum(violations) for infeasible points, W exactly otherwise.
double penalized_objective(double weight_value, const ConstraintReport& report,
                           double theta);

enum class DeflectionMode { closed_form, numeric };

const char* to_string(DeflectionMode mode);

/// Binds a deflection model to one set of beam loads and one check station.
struct DeflectionSetup {
  DeflectionMode mode = DeflectionMode::closed_form;
  int effective_section = 2;  // which d_j supplies the single EI
  std::vector<beam::PointLoad> forces;
  std::array<double, 2> supports{5.9, 25.9};
  double station = 15.9;
  int stations = beam::PiecewiseDeflection::kDefaultStations;
};

struct Evaluation {
  double weight = 0.0;
  double penalized = 0.0;
  ConstraintReport report;
};

/// Immutable, thread-safe evaluator for one shaft configuration.
class ShaftProblem {
 public:
  ShaftProblem(ShaftSpec spec, std::array<SectionMoments, 3> moments, TorqueSpec torques,
               DeflectionSetup deflection, ConstraintOptions options);

  const ShaftSpec& spec() const { return spec_; }
  const std::array<SectionMoments, 3>& moments() const { return moments_; }
  const TorqueSpec& torques() const { return torques_; }
  const DeflectionSetup& deflection_setup() const { return deflection_; }
  const ConstraintOptions& options() const { return options_; }

  double weight(const DesignVector& d) const;
  double deflection(const DesignVector& d) const;
  ConstraintReport constraints(const DesignVector& d, double theta = 0.0) const;
  Evaluation evaluate(const DesignVector& d, double theta) const;

 private:
  ShaftSpec spec_;
  std::array<SectionMoments, 3> moments_;
  TorqueSpec torques_;
  DeflectionSetup deflection_;
  ConstraintOptions options_;
};

}  // namespace snail::shaft

#endif  // SNAIL_SHAFT_MODEL_HPP
