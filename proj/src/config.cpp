#include "snail/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace snail::app {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::invalid_argument(fmt::format("'{}' is not a finite number", text));
  }
  return value;
}

long long parse_integer(std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    // Accept integral values written in floating notation, e.g. 1e5.
    const double d = parse_double(text);
    if (d != std::floor(d) || std::abs(d) > 9e18) {
      throw std::invalid_argument(fmt::format("'{}' is not an integer", text));
    }
    return static_cast<long long>(d);
  }
  return value;
}

std::uint64_t parse_unsigned(std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(fmt::format("'{}' is not an unsigned integer", text));
  }
  return value;
}

bool parse_bool(std::string_view text) {
  std::string s(trim(text));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  throw std::invalid_argument(fmt::format("'{}' is not a boolean", text));
}

double positive(double v) {
  if (!(v > 0.0)) throw std::invalid_argument(fmt::format("{} must be positive", v));
  return v;
}

int at_least(long long v, long long lo) {
  if (v < lo) throw std::invalid_argument(fmt::format("{} must be >= {}", v, lo));
  return static_cast<int>(v);
}

std::array<double, 3> parse_triple(std::string_view text) {
  std::array<double, 3> out{};
  std::size_t count = 0;
  std::string_view rest = trim(text);
  if (!rest.empty() && rest.front() == '[' && rest.back() == ']') {
    rest = rest.substr(1, rest.size() - 2);
  }
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (count == 3) throw std::invalid_argument("expected exactly three values");
    out[count++] = parse_double(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (count != 3) throw std::invalid_argument("expected exactly three values");
  return out;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }
std::string fmt_triple(const std::array<double, 3>& v) {
  return fmt::format("{}, {}, {}", v[0], v[1], v[2]);
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SNAIL_DOUBLE(section, key, member, check)                                       \
  Field {                                                                                \
    section, key, [](RunConfig& c, std::string_view v) { c.member = check(parse_double(v)); }, \
        [](const RunConfig& c) { return fmt_double(c.member); }                          \
  }

double any(double v) { return v; }

double non_negative(double v) {
  if (!(v >= 0.0)) throw std::invalid_argument(fmt::format("{} must be >= 0", v));
  return v;
}

double open_unit(double v) {
  if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(fmt::format("{} must lie in (0, 1)", v));
  return v;
}

double half_open_unit(double v) {
  if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument(fmt::format("{} must lie in (0, 1]", v));
  return v;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // [shaft]: geometry, material and fatigue constants.
    f.push_back(SNAIL_DOUBLE("shaft", "length1", spec.section_lengths[0], positive));
    f.push_back(SNAIL_DOUBLE("shaft", "length2", spec.section_lengths[1], positive));
    f.push_back(SNAIL_DOUBLE("shaft", "length3", spec.section_lengths[2], positive));
    f.push_back(SNAIL_DOUBLE("shaft", "density", spec.density, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "elastic_modulus", spec.elastic_modulus, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "ultimate_strength", spec.ultimate_strength, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "yield_strength", spec.yield_strength, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "safety_factor", spec.safety_factor, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "endurance_coefficient", spec.endurance_coefficient, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "endurance_exponent", spec.endurance_exponent, any));
    f.push_back(SNAIL_DOUBLE("shaft", "kf1", spec.kf_bending[0], positive));
    f.push_back(SNAIL_DOUBLE("shaft", "kf2", spec.kf_bending[1], positive));
    f.push_back(SNAIL_DOUBLE("shaft", "kf3", spec.kf_bending[2], positive));
    f.push_back(SNAIL_DOUBLE("shaft", "kfs", spec.kf_torsion_alt, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "kfsm", spec.kf_torsion_mean, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "deflection_limit", spec.deflection_limit, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "step_gap", spec.step_gap, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "lower_bound", spec.lower_bound, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "upper_bound", spec.upper_bound, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "torque_max", layout.torque_max, any));
    f.push_back(SNAIL_DOUBLE("shaft", "torque_min", layout.torque_min, any));
    f.push_back(SNAIL_DOUBLE("shaft", "pulley_radius", layout.pulley.pitch_radius, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "pulley_weight", layout.pulley.weight, any));
    f.push_back(SNAIL_DOUBLE("shaft", "pulley_position", layout.pulley_position, any));
    f.push_back(SNAIL_DOUBLE("shaft", "belt_friction", layout.pulley.friction, positive));
    f.push_back(Field{
        "shaft", "wrap_angle_deg",
        [](RunConfig& c, std::string_view v) {
          c.layout.pulley.wrap_angle = positive(parse_double(v)) * std::numbers::pi / 180.0;
        },
        [](const RunConfig& c) {
          return fmt_double(c.layout.pulley.wrap_angle * 180.0 / std::numbers::pi);
        }});
    f.push_back(Field{
        "shaft", "groove_angle_deg",
        [](RunConfig& c, std::string_view v) {
          c.layout.pulley.half_groove_angle =
              positive(parse_double(v)) / 2.0 * std::numbers::pi / 180.0;
        },
        [](const RunConfig& c) {
          return fmt_double(c.layout.pulley.half_groove_angle * 2.0 * 180.0 / std::numbers::pi);
        }});
    f.push_back(SNAIL_DOUBLE("shaft", "belt_angle_deg", layout.pulley.resolution_angle_deg, any));
    f.push_back(Field{
        "shaft", "belt_tension_ratio",
        [](RunConfig& c, std::string_view v) {
          if (trim(v) == "exact") {
            c.layout.pulley.tension_ratio_override.reset();
            return;
          }
          const double r = parse_double(v);
          if (!(r > 1.0)) throw std::invalid_argument("tension ratio must exceed 1 (or be 'exact')");
          c.layout.pulley.tension_ratio_override = r;
        },
        [](const RunConfig& c) {
          const auto& r = c.layout.pulley.tension_ratio_override;
          return r ? fmt_double(*r) : std::string("exact");
        }});
    f.push_back(SNAIL_DOUBLE("shaft", "gear_radius", layout.gear.pitch_radius, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "gear_weight", layout.gear.weight, any));
    f.push_back(SNAIL_DOUBLE("shaft", "gear_position", layout.gear_position, any));
    f.push_back(SNAIL_DOUBLE("shaft", "pressure_angle_deg", layout.gear.pressure_angle_deg, positive));
    f.push_back(SNAIL_DOUBLE("shaft", "support_a", layout.supports[0], any));
    f.push_back(SNAIL_DOUBLE("shaft", "support_b", layout.supports[1], any));

    // [algorithm]
    auto int_field = [](const char* key, auto member, long long lo) {
      return Field{"algorithm", key,
                   [member, lo](RunConfig& c, std::string_view v) {
                     c.*member = at_least(parse_integer(v), lo);
                   },
                   [member](const RunConfig& c) { return fmt::format("{}", c.*member); }};
    };
    f.push_back(Field{
        "algorithm", "homes",
        [](RunConfig& c, std::string_view v) { c.algorithm.homes = at_least(parse_integer(v), 1); },
        [](const RunConfig& c) { return fmt::format("{}", c.algorithm.homes); }});
    f.push_back(Field{"algorithm", "snails_per_home",
                      [](RunConfig& c, std::string_view v) {
                        c.algorithm.snails_per_home = at_least(parse_integer(v), 2);
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.algorithm.snails_per_home); }});
    f.push_back(SNAIL_DOUBLE("algorithm", "initial_interval", algorithm.initial_interval, half_open_unit));
    f.push_back(SNAIL_DOUBLE("algorithm", "interval_shrink", algorithm.interval_shrink, open_unit));
    f.push_back(SNAIL_DOUBLE("algorithm", "theta", algorithm.theta, positive));
    f.push_back(Field{"algorithm", "max_iterations",
                      [](RunConfig& c, std::string_view v) {
                        c.algorithm.max_iterations = at_least(parse_integer(v), 1);
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.algorithm.max_iterations); }});
    f.push_back(Field{"algorithm", "max_evaluations",
                      [](RunConfig& c, std::string_view v) {
                        const long long n = parse_integer(v);
                        if (n < 1) throw std::invalid_argument("must be >= 1");
                        c.algorithm.max_evaluations = static_cast<long>(n);
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.algorithm.max_evaluations); }});
    f.push_back(Field{"algorithm", "stagnation_window",
                      [](RunConfig& c, std::string_view v) {
                        c.algorithm.stagnation_window = at_least(parse_integer(v), 1);
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.algorithm.stagnation_window); }});
    f.push_back(SNAIL_DOUBLE("algorithm", "improvement_tolerance", algorithm.improvement_tolerance, non_negative));
    f.push_back(SNAIL_DOUBLE("algorithm", "interval_floor", algorithm.interval_floor, non_negative));
    f.push_back(SNAIL_DOUBLE("algorithm", "epsilon", algorithm.epsilon, positive));
    f.push_back(Field{
        "algorithm", "seed",
        [](RunConfig& c, std::string_view v) { c.algorithm.seed = parse_unsigned(v); },
        [](const RunConfig& c) { return fmt::format("{}", c.algorithm.seed); }});
    f.push_back(int_field("runs", &RunConfig::runs, 1));
    f.push_back(int_field("threads", &RunConfig::threads, 0));

    // [policy]
    f.push_back(Field{
        "policy", "eval_policy",
        [](RunConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s == "section-max") {
            c.policy.kind = beam::EvalPolicy::Kind::section_max;
          } else if (s == "paper-mode") {
            c.policy = beam::EvalPolicy::paper_mode();
          } else if (s == "explicit") {
            c.policy.kind = beam::EvalPolicy::Kind::explicit_positions;
          } else {
            throw std::invalid_argument(fmt::format(
                "'{}' is not one of section-max, paper-mode, explicit", s));
          }
        },
        [](const RunConfig& c) { return std::string(beam::to_string(c.policy.kind)); }});
    f.push_back(Field{
        "policy", "eval_positions",
        [](RunConfig& c, std::string_view v) { c.policy.positions = parse_triple(v); },
        [](const RunConfig& c) { return fmt_triple(c.policy.positions); }});
    f.push_back(Field{
        "policy", "deflection_mode",
        [](RunConfig& c, std::string_view v) {
          const auto s = trim(v);
          if (s == "closed-form") {
            c.deflection_mode = shaft::DeflectionMode::closed_form;
          } else if (s == "numeric") {
            c.deflection_mode = shaft::DeflectionMode::numeric;
          } else {
            throw std::invalid_argument(fmt::format("'{}' is not one of closed-form, numeric", s));
          }
        },
        [](const RunConfig& c) { return std::string(shaft::to_string(c.deflection_mode)); }});
    f.push_back(Field{"policy", "effective_section",
                      [](RunConfig& c, std::string_view v) {
                        const int s = at_least(parse_integer(v), 1);
                        if (s > 3) throw std::invalid_argument("must be 1, 2 or 3");
                        c.effective_section = s;
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.effective_section); }});
    f.push_back(Field{"policy", "numeric_stations",
                      [](RunConfig& c, std::string_view v) {
                        c.numeric_stations = at_least(parse_integer(v), 10000);
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.numeric_stations); }});
    f.push_back(SNAIL_DOUBLE("policy", "deflection_station", deflection_station, any));
    for (std::size_t j = 0; j < shaft::kConstraintCount; ++j) {
      f.push_back(Field{fmt::format("policy"), fmt::format("enable_g{}", j + 1),
                        [j](RunConfig& c, std::string_view v) {
                          c.constraints.enabled[j] = parse_bool(v);
                        },
                        [j](const RunConfig& c) { return fmt_bool(c.constraints.enabled[j]); }});
    }
    f.push_back(Field{"policy", "feasibility_tolerance",
                      [](RunConfig& c, std::string_view v) {
                        const double t = parse_double(v);
                        if (t < 0.0) throw std::invalid_argument("must be >= 0");
                        c.constraints.tolerance = t;
                      },
                      [](const RunConfig& c) { return fmt_double(c.constraints.tolerance); }});
    f.push_back(SNAIL_DOUBLE("policy", "oracle_step", oracle_step, positive));
    f.push_back(Field{"policy", "oracle_refinements",
                      [](RunConfig& c, std::string_view v) {
                        c.oracle_refinements = at_least(parse_integer(v), 0);
                      },
                      [](const RunConfig& c) { return fmt::format("{}", c.oracle_refinements); }});

    // [output]
    f.push_back(Field{
        "output", "directory",
        [](RunConfig& c, std::string_view v) {
          const auto s = unquote(trim(v));
          if (s.empty()) throw std::invalid_argument("output directory must not be empty");
          c.output_directory = std::string(s);
        },
        [](const RunConfig& c) { return fmt::format("\"{}\"", c.output_directory); }});
    f.push_back(Field{
        "output", "write_trace",
        [](RunConfig& c, std::string_view v) { c.write_trace = parse_bool(v); },
        [](const RunConfig& c) { return fmt_bool(c.write_trace); }});
    return f;
  }();
  return table;
}

#undef SNAIL_DOUBLE

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"shaft", "algorithm", "policy", "output"};
  return s;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key && (section.empty() || f.section == section)) return &f;
  }
  return nullptr;
}

void assign(RunConfig& config, std::string_view section, std::string_view key,
            std::string_view value, const std::string& source, int line) {
  const Field* field = find_field(section, key);
  const std::string name = section.empty() ? std::string(key) : fmt::format("{}.{}", section, key);
  if (!field) {
    if (!section.empty() && find_field({}, key)) {
      throw ConfigError(source, line, name,
                        fmt::format("key '{}' does not belong to section [{}]", key, section));
    }
    throw ConfigError(source, line, name, fmt::format("unknown key '{}'", key));
  }
  try {
    field->set(config, value);
  } catch (const std::exception& e) {
    throw ConfigError(source, line, name, e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::string file, int line, std::string field,
                         const std::string& message)
    : std::runtime_error(line > 0
                             ? fmt::format("{}:{}: {}: {}", file, line, field, message)
                             : fmt::format("{}: {}: {}", file, field, message)),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)),
      message_(message) {}

RunConfig::RunConfig() {
  // The reference load table was computed with T1/T2 = 4.987 rounded to 5.
  layout.pulley.tension_ratio_override = 5.0;
  layout.length = spec.total_length();
}

void RunConfig::validate(const std::string& source) const {
  auto check = [&](const char* field, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(source, 0, field, e.what());
    }
  };
  check("shaft", [&] { spec.validate(); });
  check("shaft.pulley", [&] { layout.pulley.validate(); });
  check("shaft.gear", [&] { layout.gear.validate(); });
  check("algorithm", [&] { algorithm.validate(); });
  const double length = spec.total_length();
  check("shaft.torque_min", [&] {
    if (layout.torque_min < 0.0 || layout.torque_max < layout.torque_min) {
      throw std::invalid_argument("need 0 <= torque_min <= torque_max");
    }
  });
  check("shaft.support_b", [&] {
    for (double s : layout.supports) {
      if (s < 0.0 || s > length) throw std::invalid_argument("supports must lie on the shaft");
    }
    if (std::abs(layout.supports[1] - layout.supports[0]) < 1e-9) {
      throw std::invalid_argument("supports coincide");
    }
  });
  check("shaft.gear_position", [&] {
    for (double p : {layout.pulley_position, layout.gear_position}) {
      if (p < 0.0 || p > length) throw std::invalid_argument("loads must lie on the shaft");
    }
  });
  check("policy.deflection_station", [&] {
    if (deflection_station < 0.0 || deflection_station > length) {
      throw std::invalid_argument("deflection station must lie on the shaft");
    }
  });
  check("policy.eval_positions", [&] {
    if (policy.kind == beam::EvalPolicy::Kind::section_max) return;
    const auto bounds = spec.section_bounds();
    for (int i = 0; i < 3; ++i) {
      const double x = policy.positions[i];
      if (x < bounds[i] - 1e-9 || x > bounds[i + 1] + 1e-9) {
        throw std::invalid_argument(fmt::format(
            "position {} for section {} lies outside [{}, {}]", x, i + 1, bounds[i], bounds[i + 1]));
      }
    }
  });
}

RunConfig parse_config(std::string_view text, const std::string& source,
                       const std::set<std::string>& ignored_sections) {
  RunConfig config;
  std::string section;
  bool skipping = false;
  int line_no = 0;
  std::map<std::string, int> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(source, line_no, std::string(line), "unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      skipping = ignored_sections.contains(section);
      if (!skipping && !known_sections().contains(section)) {
        throw ConfigError(source, line_no, section, fmt::format("unknown section [{}]", section));
      }
      continue;
    }
    if (skipping) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source, line_no, std::string(line), "expected 'key = value'");
    }
    std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    std::string key_section = section;
    if (const auto dot = key.find('.'); dot != std::string_view::npos && section.empty()) {
      key_section = std::string(key.substr(0, dot));
      key = key.substr(dot + 1);
    }
    if (value.empty()) {
      throw ConfigError(source, line_no, std::string(key), "missing value");
    }
    assign(config, key_section, key, value, source, line_no);
    const Field* field = find_field(key_section, key);
    lines[fmt::format("{}.{}", field->section, field->key)] = line_no;
  }
  config.layout.length = config.spec.total_length();
  try {
    config.validate(source);
  } catch (const ConfigError& e) {
    // Point at the line that set the offending field, when there is one.
    const auto hit = lines.find(e.field());
    if (e.line() != 0 || hit == lines.end()) throw;
    throw ConfigError(source, hit->second, e.field(), e.message());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "file", "cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("--set", 0, std::string(assignment), "expected key=value");
  }
  std::string_view key = trim(assignment.substr(0, eq));
  const std::string_view value = trim(assignment.substr(eq + 1));
  std::string_view section;
  if (const auto dot = key.find('.'); dot != std::string_view::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
    if (!known_sections().contains(std::string(section))) {
      throw ConfigError("--set", 0, std::string(section),
                        fmt::format("unknown section [{}]", section));
    }
  }
  assign(config, section, key, value, "--set", 0);
  config.layout.length = config.spec.total_length();
  config.validate("--set");
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += fmt::format("[{}]\n", section);
    }
    out += fmt::format("{} = {}\n", f.key, f.get(config));
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(fmt::format("{}.{}", f.section, f.key));
  return keys;
}

}  // namespace snail::app
