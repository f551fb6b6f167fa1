#pragma once

#include <string>
#include <utility>

#include "gkflow/grid.hpp"

namespace gkflow {

// Writes an 8-bit binary portable graymap of a reduced-mode field, linearly
// scaled over the returned (min, max) range; a constant field maps to mid
// gray. Complex fields map through their modulus. Throws ConfigError for
// full4d grids.
std::pair<double, double> write_heatmap(const ScalarField& f,
                                        const std::string& path);

}  // namespace gkflow
