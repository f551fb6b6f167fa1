#pragma once

#include "gkflow/grid.hpp"

namespace gkflow {

// Derivative operators in the adapted complex coordinates. Normalization:
//   d/dz   = (1/2)(d/dx1 - i d/dx2)      d/dw   = (1/2)(d/dx3 - i d/dx4)
//   d/dzb  = (1/2)(d/dx1 + i d/dx2)      d/dwb  = (1/2)(d/dx3 + i d/dx4)
// so in reduced mode DzDzbar f = (1/4) d^2f/dx1^2 and
// DzDw f = (1/4) d^2f/(dx1 dx3). Odd single-axis factors zero the Nyquist
// mode; pure second derivatives keep it.
enum class DiffOp {
  Dz,
  Dzbar,
  Dw,
  Dwbar,
  DzDzbar,
  DwDwbar,
  DzDw,
  Mixed4,  // DzDzbar composed with DwDwbar
};

// Spectral application of op. Exact for band-limited data. Output is real
// whenever the input is real and the op preserves realness on the current
// grid mode (all ops in reduced mode; only the even second-order ops in
// full 4d mode). Throws NonFiniteField on bad input.
ScalarField differentiate(const ScalarField& f, DiffOp op);

// Raw derivative along one axis (axis in 0..3, order 1 or 2). Throws
// ConfigError when the axis is suppressed by the grid mode.
ScalarField axis_derivative(const ScalarField& f, int axis, int order);

// 2/3-rule dealiasing: zero all modes with |k_j| > (1/3) n_j along any
// present axis.
ScalarField dealias_23(const ScalarField& f);

bool op_preserves_realness(DiffOp op, GridMode mode);

}  // namespace gkflow
