// Run configuration: a flat key = value text file with [shaft], [algorithm],
// [policy] and [output] sections. Every key has a default, so an empty file
// is a valid configuration.

#ifndef SNAIL_CONFIG_HPP
#define SNAIL_CONFIG_HPP

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "snail/beam_statics.hpp"
#include "snail/shaft_model.hpp"
#include "snail/shms.hpp"

namespace snail::app {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string file, int line, std::string field, const std::string& message);

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  std::string file_;
  int line_;
  std::string field_;
  std::string message_;
};

struct RunConfig {
  shaft::ShaftSpec spec;
  beam::ShaftLayout layout;

  search::Params algorithm;
  int runs = 30;
  int threads = 0;

  beam::EvalPolicy policy = beam::EvalPolicy::section_max();
  shaft::DeflectionMode deflection_mode = shaft::DeflectionMode::closed_form;
  int effective_section = 2;
  int numeric_stations = beam::PiecewiseDeflection::kDefaultStations;
  double deflection_station = 15.9;
  shaft::ConstraintOptions constraints;

  double oracle_step = 0.01;
  int oracle_refinements = 9;

  std::string output_directory = "shms-out";
  bool write_trace = true;

  RunConfig();

  /// Cross-field checks; throws ConfigError with line 0.
  void validate(const std::string& source = "<config>") const;
};

/// Parses configuration text. Sections listed in `ignored_sections` are
/// skipped, which lets result files that embed a configuration be re-read.
RunConfig parse_config(std::string_view text, const std::string& source = "<config>",
                       const std::set<std::string>& ignored_sections = {});

RunConfig load_config(const std::filesystem::path& path);

/// Applies one "key=value" or "section.key=value" override.
void apply_override(RunConfig& config, std::string_view assignment);

/// Full effective configuration in the same format parse_config reads.
std::string to_config_text(const RunConfig& config);

/// "section.key" for every recognised field, in echo order.
std::vector<std::string> config_keys();

}  // namespace snail::app

#endif  // SNAIL_CONFIG_HPP
