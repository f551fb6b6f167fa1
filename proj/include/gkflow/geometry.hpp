#pragma once

#include "gkflow/grid.hpp"

namespace gkflow {

// Split Hermitian metric on the model: w = i*gplus dz^dzb + i*gminus dw^dwb.
// Rank-1 blocks, so each block determinant is the coefficient itself.
struct SplitMetric {
  ScalarField gplus;
  ScalarField gminus;
};

// A real (1,1)-form supported on the two diagonal slots. Components are the
// coefficients against i dz^dzb and i dw^dwb.
struct CurvatureForm {
  ScalarField p_plus;
  ScalarField p_minus;
};

struct TorsionData {
  ScalarField t_plus;   // d_w gplus, the only torsion component on T+
  ScalarField t_minus;  // d_z gminus
  ScalarField norm_sq;  // |T|^2, real >= 0
  ScalarField q_plus;   // dz^dzb component of Q
  ScalarField q_minus;  // dw^dwb component of Q
};

struct ConstraintReport {
  double pluriclosed_resid = 0.0;  // sup |dwdwb gplus + dzdzb gminus|
  double min_gplus = 0.0;
  double min_gminus = 0.0;
};

// Pointwise squared norms of the connection-difference tensor between the
// flowing metric and a reference metric, in the two contraction weightings
// used by the trace evolution equations: gg_h contracts the lower indices
// with the inverse flowing metric and the upper with the reference; gh_g
// swaps the roles on the block index.
struct UpsilonNorms {
  ScalarField gg_h_plus;
  ScalarField gg_h_minus;
  ScalarField gh_g_plus;
  ScalarField gh_g_minus;
};

ScalarField pluriclosed_residual_field(const SplitMetric& m);
ConstraintReport constraint_residuals(const SplitMetric& m);
void require_admissible(const SplitMetric& m, double eps_pos, const char* what);

TorsionData torsion(const SplitMetric& m, double eps_pos = kDefaultEpsPos);

// Transgression form of a positive block determinant: both diagonal slots of
// -dd^c log det.
CurvatureForm rho_transgression(const ScalarField& det_field,
                                double eps_pos = kDefaultEpsPos);

// P via the split log-ratio reduction.
CurvatureForm p_split(const SplitMetric& m, double eps_pos = kDefaultEpsPos);

// P via the literal second-order coordinate formula with its three quadratic
// correction sums, kept as explicit block sums. Independent of p_split; the
// mixed slot is returned so callers can assert the structural vanishing.
struct DirectCurvature {
  CurvatureForm form;
  ScalarField mixed;  // (z, wbar) slot, complex; identically 0 in theory
};
DirectCurvature p_direct(const SplitMetric& m, double eps_pos = kDefaultEpsPos);

ScalarField chern_laplacian(const SplitMetric& m, const ScalarField& u,
                            double eps_pos = kDefaultEpsPos);

UpsilonNorms connection_difference(const SplitMetric& g, const SplitMetric& h,
                                   double eps_pos = kDefaultEpsPos);

}  // namespace gkflow
