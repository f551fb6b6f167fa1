#include "gkflow/scenario.hpp"

#include <cstdlib>

#include "gkflow/expr.hpp"
#include "gkflow/snapshot.hpp"

namespace gkflow {

namespace {

bool has_prefix(const std::string& s, const char* prefix, std::string& rest) {
  const std::string p(prefix);
  if (s.rfind(p, 0) != 0) return false;
  rest = s.substr(p.size());
  return true;
}

ScalarField load_snapshot_field(const std::string& path, const GridSpec& g) {
  ScalarField f = read_snapshot(path);
  if (!(f.spec == g))
    throw ConfigError("snapshot '" + path + "' does not match the run grid");
  if (!f.is_real())
    throw ConfigError("snapshot '" + path + "' must hold a real field");
  return f;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

ScalarField resolve_field_spec(const std::string& spec, const GridSpec& g) {
  std::string rest;
  if (has_prefix(spec, "conformal:", rest))
    return exp_field(evaluate(parse_field_expr(rest), g));
  if (has_prefix(spec, "snapshot:", rest)) return load_snapshot_field(rest, g);
  double v = 0.0;
  if (!parse_number(spec, v))
    throw ConfigError("field spec '" + spec +
                      "' is not a number, conformal:<expr> or snapshot:<path>");
  return ScalarField::constant(g, v);
}

ScalarField resolve_potential_spec(const std::string& spec, const GridSpec& g) {
  std::string rest;
  if (has_prefix(spec, "snapshot:", rest)) return load_snapshot_field(rest, g);
  return evaluate(parse_field_expr(spec), g);
}

ScenarioSetup build_scenario(const RunConfig& cfg) {
  RunConfig resolved = cfg;
  if (cfg.scenario != Scenario::Custom) {
    const RunConfig defaults;
    if (cfg.initial_potential != defaults.initial_potential ||
        cfg.hplus != defaults.hplus || cfg.hminus != defaults.hminus ||
        cfg.g0plus != defaults.g0plus || cfg.g0minus != defaults.g0minus)
      throw ConfigError(
          "scenario presets determine the geometric fields; use scenario=custom "
          "to set them");
    switch (cfg.scenario) {
      case Scenario::FlatStationary:
        break;
      case Scenario::KahlerReduction:
        resolved.initial_potential = "0.3*cos(2*x1)";
        break;
      case Scenario::GenericPotential:
        resolved.initial_potential = "0.2*sin(x1)*sin(x3)";
        break;
      case Scenario::ConformalBackground:
        resolved.hplus = "conformal:0.1*cos(x1)";
        break;
      case Scenario::Custom:
        break;
    }
  }

  const GridSpec& g = resolved.grid;
  g.validate();
  const ScalarField hp = resolve_field_spec(resolved.hplus, g);
  const ScalarField hm = resolve_field_spec(resolved.hminus, g);
  const ScalarField g0p =
      resolved.g0plus == "h" ? hp : resolve_field_spec(resolved.g0plus, g);
  const ScalarField g0m =
      resolved.g0minus == "h" ? hm : resolve_field_spec(resolved.g0minus, g);

  ScenarioSetup setup;
  setup.bg = make_background(SplitMetric{g0p, g0m}, hp, hm, cfg.eps_pos);
  setup.s0.t = 0.0;
  setup.s0.f = resolve_potential_spec(resolved.initial_potential, g);
  return setup;
}

}  // namespace gkflow
