#pragma once

#include <string>
#include <vector>

#include "gkflow/grid.hpp"

namespace gkflow {

enum class Scenario {
  FlatStationary,
  KahlerReduction,
  GenericPotential,
  ConformalBackground,
  Custom,
};

std::string scenario_name(Scenario s);
Scenario scenario_from(const std::string& name);  // throws ConfigError

// Field specifications accept: a plain number (constant field),
// "conformal:<expr>" (exponential of the expression), or
// "snapshot:<path>" (stored field). The initial potential accepts an
// expression or "snapshot:<path>". g0plus/g0minus additionally accept "h",
// which copies the corresponding reference metric.
struct RunConfig {
  Scenario scenario = Scenario::FlatStationary;
  GridSpec grid;
  std::string initial_potential = "0";
  std::string hplus = "1";
  std::string hminus = "1";
  std::string g0plus = "h";
  std::string g0minus = "h";
  double t_end = 1.0;
  double snapshot_dt = 0.0;  // 0: endpoints only
  double monitor_dt = 0.0;   // 0: every step
  double sigma_cfl = 0.25;
  double eps_pos = 1e-8;
  double mub_A = 1.0;
  std::vector<std::string> checks;
  long seed = 0;

  bool operator==(const RunConfig&) const = default;
};

// Plain-text key=value lines; '#' starts a comment. Unknown keys are
// rejected with the key and line number.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Inverse of parse_config_text: parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Single assignment, shared by the file parser and CLI flag overrides.
// line <= 0 marks a non-file source in error messages.
void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value, int line);

void validate_config(const RunConfig& cfg);

const std::vector<std::string>& known_check_names();

}  // namespace gkflow
