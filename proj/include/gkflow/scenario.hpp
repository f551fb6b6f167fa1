#pragma once

#include <string>

#include "gkflow/config.hpp"
#include "gkflow/flow.hpp"

namespace gkflow {

struct ScenarioSetup {
  Background bg;
  PotentialState s0;
};

// number | conformal:<expr> | snapshot:<path>  ->  positive real field
ScalarField resolve_field_spec(const std::string& spec, const GridSpec& g);

// expression | snapshot:<path>  ->  real field
ScalarField resolve_potential_spec(const std::string& spec, const GridSpec& g);

// Realizes the configured scenario. Presets fully determine the geometric
// fields; supplying them alongside a preset is rejected.
ScenarioSetup build_scenario(const RunConfig& cfg);

}  // namespace gkflow
