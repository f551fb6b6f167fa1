#pragma once

#include <string>
#include <vector>

#include "gkflow/grid.hpp"

namespace gkflow {

// Tiny closed expression grammar for reproducible field fixtures:
//   expr   := term (('+' | '-') term)*
//   term   := number ('*' factor)* | factor ('*' factor)*
//   factor := ('sin' | 'cos') '(' [number '*'] ('x1'|'x2'|'x3'|'x4') ')'
// Numbers are decimal literals. Evaluation validates that every referenced
// axis is present on the grid and that every wavenumber is commensurate
// with the axis period.

struct ExprFactor {
  bool is_sin = true;
  double wavenumber = 1.0;
  int axis = 0;  // 0..3 for x1..x4
};

struct ExprTerm {
  double coef = 1.0;
  std::vector<ExprFactor> factors;  // empty: constant term
};

struct FieldExpr {
  std::vector<ExprTerm> terms;
  std::string source;
};

FieldExpr parse_field_expr(const std::string& text);  // throws ConfigError
ScalarField evaluate(const FieldExpr& e, const GridSpec& g);

}  // namespace gkflow
