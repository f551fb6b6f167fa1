#pragma once

#include <string>
#include <vector>

#include "gkflow/config.hpp"
#include "gkflow/verify.hpp"

namespace gkflow {

struct CheckVerdict {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunReport {
  std::string config_echo;
  bool completed = false;
  std::string abort_reason;
  double t_final = 0.0;
  double c_f = 0.0;
  double c_fdot = 0.0;
  double c_phi = 0.0;
  std::vector<CheckVerdict> checks;
  std::vector<std::string> files;  // paths written, relative to out_dir
  bool all_pass = false;
  int exit_code = 2;  // 0 pass, 2 failed check or abort, 3 cone abort
  std::string text() const;
};

// Output directory: the explicit argument when nonempty, else $GKFLOW_OUT_DIR,
// else the current directory. Created on demand.
std::string resolve_out_dir(const std::string& requested);

// Evolves the configured scenario, writes monitors, endpoint fields, the
// config echo and a report, and runs the configured checks once at the run's
// own resolution. Residual magnitudes at a single resolution are reported,
// not judged; order verdicts belong to verify_scenario.
RunReport run_scenario(const RunConfig& cfg, const std::string& out_dir);

// Fixed-step refinement study: four runs with halving dt and constant
// snapshot stride, so every identity series must shrink at second order. A
// series passes when the worst log2 ratio between consecutive levels is at
// least 1.7.
RunReport verify_scenario(const RunConfig& cfg, const std::string& out_dir);

// Couples the scalar heat equation to the evolving metric and reports the
// gradient monotonicity diagnostics. Empty u0 uses sin(x1) + sin(x3).
RunReport heat_scenario(const RunConfig& cfg, const std::string& u0_spec,
                        const std::string& out_dir);

}  // namespace gkflow
