#include "snail/shaft_model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace snail::shaft {

namespace {

constexpr double kLbfInPerSecondPerHp = 6600.0;

void check_section(int section_index) {
  if (section_index < 1 || section_index > 3) {
    throw std::invalid_argument(fmt::format("section index {} is not in 1..3", section_index));
  }
}

}  // namespace

double ShaftSpec::total_length() const {
  return section_lengths[0] + section_lengths[1] + section_lengths[2];
}

std::array<double, 4> ShaftSpec::section_bounds() const {
  return {0.0, section_lengths[0], section_lengths[0] + section_lengths[1], total_length()};
}

void ShaftSpec::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::domain_error(fmt::format("{} must be positive", name));
  };
  for (double l : section_lengths) positive(l, "section length");
  positive(density, "density");
  positive(elastic_modulus, "elastic modulus");
  positive(ultimate_strength, "ultimate strength");
  positive(yield_strength, "yield strength");
  positive(safety_factor, "safety factor");
  positive(endurance_coefficient, "endurance coefficient");
  if (!(endurance_exponent < 0.0)) {
    throw std::domain_error("endurance exponent must be negative");
  }
  for (double k : kf_bending) positive(k, "bending stress concentration factor");
  positive(kf_torsion_alt, "K_fs");
  positive(kf_torsion_mean, "K_fsm");
  positive(deflection_limit, "deflection limit");
  positive(step_gap, "step gap");
  positive(lower_bound, "lower bound");
  if (!(upper_bound > lower_bound)) {
    throw std::domain_error("upper bound must exceed lower bound");
  }
}

double torque_from_power(double power_hp, double speed_rpm) {
  if (!(speed_rpm > 0.0)) throw std::domain_error("shaft speed must be positive");
  if (power_hp < 0.0) throw std::domain_error("power must be >= 0");
  const double omega = 2.0 * std::numbers::pi * speed_rpm / 60.0;
  return power_hp * kLbfInPerSecondPerHp / omega;
}

TorqueSpec mean_alt_torque(double torque_max, double torque_min) {
  if (torque_max < torque_min) {
    throw std::invalid_argument("maximum torque must not be below minimum torque");
  }
  return {torque_max, torque_min, (torque_max + torque_min) / 2.0,
          (torque_max - torque_min) / 2.0};
}

double endurance_limit(double diameter, const ShaftSpec& spec) {
  if (!(diameter > 0.0)) throw std::domain_error("diameter must be positive");
  return spec.endurance_coefficient * std::pow(diameter, spec.endurance_exponent);
}

double goodman_required_diameter(int section_index, const SectionMoments& moments,
                                 const TorqueSpec& torques, const ShaftSpec& spec,
                                 double d_candidate) {
  check_section(section_index);
  if (!(spec.ultimate_strength > 0.0) || !(spec.endurance_coefficient > 0.0) ||
      !(spec.safety_factor > 0.0)) {
    throw std::domain_error("strength parameters must be positive");
  }
  const double kf = spec.kf_bending[section_index - 1];
  const double se = endurance_limit(d_candidate, spec);

  const double alt_bending = kf * moments.alternating;
  const double alt_torsion = spec.kf_torsion_alt * torques.alt;
  const double mean_bending = kf * moments.mean;
  const double mean_torsion = spec.kf_torsion_mean * torques.mean;

  const double alternating =
      std::sqrt(alt_bending * alt_bending + 0.75 * alt_torsion * alt_torsion) / se;
  const double mean =
      std::sqrt(mean_bending * mean_bending + 0.75 * mean_torsion * mean_torsion) /
      spec.ultimate_strength;
  return std::cbrt(32.0 * spec.safety_factor / std::numbers::pi * (alternating + mean));
}

FixedPoint goodman_fixed_point(int section_index, const SectionMoments& moments,
                               const TorqueSpec& torques, const ShaftSpec& spec,
                               double start, double tolerance, int max_iterations) {
  FixedPoint fp{start, 0, false};
  for (int i = 1; i <= max_iterations; ++i) {
    const double next = goodman_required_diameter(section_index, moments, torques, spec, fp.diameter);
    const double step = std::abs(next - fp.diameter);
    fp.diameter = next;
    fp.iterations = i;
    if (step < tolerance) {
      fp.converged = true;
      break;
    }
    if (!(next > 0.0)) break;  // unloaded section: k = 0 has no positive fixed point
  }
  return fp;
}

double weight(const DesignVector& d, const ShaftSpec& spec) {
  double sum = 0.0;
  for (std::size_t j = 0; j < 3; ++j) sum += spec.section_lengths[j] * d[j] * d[j];
  return spec.density * std::numbers::pi / 4.0 * sum;
}

double ConstraintReport::total_violation() const {
  return std::accumulate(violations.begin(), violations.end(), 0.0);
}

ConstraintReport evaluate_constraints(const DesignVector& d,
                                      const std::array<SectionMoments, 3>& moments,
                                      const TorqueSpec& torques, const ShaftSpec& spec,
                                      const DeflectionFn& deflection,
                                      const ConstraintOptions& options) {
  ConstraintReport r;
  r.enabled = options.enabled;
  // Strength requirement d_j >= k(d_j).
  for (int j = 0; j < 3; ++j) {
    r.required[j] = goodman_required_diameter(j + 1, moments[j], torques, spec, d[j]);
    r.signed_values[j] = r.required[j] - d[j];
  }
  r.signed_values[3] = spec.step_gap - (d[1] - d[0]);
  r.signed_values[4] = spec.step_gap - (d[1] - d[2]);
  r.deflection = deflection ? deflection(d) : 0.0;
  r.signed_values[5] = std::abs(r.deflection) - spec.deflection_limit;

  r.feasible = true;
  for (std::size_t j = 0; j < kConstraintCount; ++j) {
    r.violations[j] = r.enabled[j] ? std::max(0.0, r.signed_values[j]) : 0.0;
    if (r.violations[j] > options.tolerance) r.feasible = false;
  }
  return r;
}

double penalized_objective(double weight_value, const ConstraintReport& report,
                           double theta) {
  if (report.feasible) return weight_value;
  return weight_value + theta * report.total_violation();
}

const char* to_string(DeflectionMode mode) {
  return mode == DeflectionMode::closed_form ? "closed-form" : "numeric";
}

ShaftProblem::ShaftProblem(ShaftSpec spec, std::array<SectionMoments, 3> moments,
                           TorqueSpec torques, DeflectionSetup deflection,
                           ConstraintOptions options)
    : spec_(spec),
      moments_(moments),
      torques_(torques),
      deflection_(std::move(deflection)),
      options_(options) {
  spec_.validate();
  if (deflection_.effective_section < 1 || deflection_.effective_section > 3) {
    throw std::invalid_argument("effective section must be 1, 2 or 3");
  }
  if (!(options_.tolerance >= 0.0)) {
    throw std::invalid_argument("feasibility tolerance must be >= 0");
  }
}

double ShaftProblem::weight(const DesignVector& d) const { return shaft::weight(d, spec_); }

double ShaftProblem::deflection(const DesignVector& d) const {
  if (deflection_.mode == DeflectionMode::closed_form) {
    return beam::deflection_closed_form(deflection_.station, deflection_.forces,
                                        deflection_.supports, spec_.elastic_modulus,
                                        d[deflection_.effective_section - 1]);
  }
  return beam::deflection_numeric(deflection_.station, deflection_.forces,
                                  deflection_.supports, spec_.elastic_modulus, d.d,
                                  spec_.section_bounds(), deflection_.stations);
}

ConstraintReport ShaftProblem::constraints(const DesignVector& d, double theta) const {
  auto report = evaluate_constraints(
      d, moments_, torques_, spec_, [this](const DesignVector& v) { return deflection(v); },
      options_);
  report.penalty = report.feasible ? 0.0 : theta * report.total_violation();
  return report;
}

Evaluation ShaftProblem::evaluate(const DesignVector& d, double theta) const {
  Evaluation e;
  e.weight = weight(d);
  e.report = constraints(d, theta);
  e.penalized = penalized_objective(e.weight, e.report, theta);
  return e;
}

}  // namespace snail::shaft
