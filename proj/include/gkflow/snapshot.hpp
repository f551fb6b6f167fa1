#pragma once

#include <string>

#include "gkflow/grid.hpp"

namespace gkflow {

// GKF1 snapshot container, little-endian:
//   magic "GKF1"
//   u32 mode flag (0 = reduced2d, 1 = full4d)
//   u32 size per present axis
//   f64 period per present axis
//   row-major f64 samples; complex fields interleave (re, im)
// The field kind is inferred from the payload length.
void write_snapshot(const std::string& path, const ScalarField& f);
ScalarField read_snapshot(const std::string& path);

}  // namespace gkflow
