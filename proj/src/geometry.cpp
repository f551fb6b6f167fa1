#include "gkflow/geometry.hpp"

#include "gkflow/spectral.hpp"

namespace gkflow {

namespace {

void check_pair(const SplitMetric& m, const char* what) {
  check_same_grid(m.gplus, m.gminus, what);
  if (!m.gplus.is_real() || !m.gminus.is_real())
    throw ConfigError(std::string(what) + ": metric coefficients must be real");
}

}  // namespace

ScalarField pluriclosed_residual_field(const SplitMetric& m) {
  check_pair(m, "pluriclosed residual");
  return add(differentiate(m.gplus, DiffOp::DwDwbar),
             differentiate(m.gminus, DiffOp::DzDzbar));
}

ConstraintReport constraint_residuals(const SplitMetric& m) {
  ConstraintReport r;
  r.pluriclosed_resid = sup_abs(pluriclosed_residual_field(m));
  r.min_gplus = inf(m.gplus);
  r.min_gminus = inf(m.gminus);
  return r;
}

void require_admissible(const SplitMetric& m, double eps_pos, const char* what) {
  check_pair(m, what);
  require_positive(m.gplus, eps_pos, what);
  require_positive(m.gminus, eps_pos, what);
}

TorsionData torsion(const SplitMetric& m, double eps_pos) {
  require_admissible(m, eps_pos, "torsion");
  TorsionData td;
  td.t_plus = differentiate(m.gplus, DiffOp::Dw);
  td.t_minus = differentiate(m.gminus, DiffOp::Dz);
  const ScalarField tp2 = abs2(td.t_plus);
  const ScalarField tm2 = abs2(td.t_minus);
  const ScalarField gp2 = mul(m.gplus, m.gplus);
  const ScalarField gm2 = mul(m.gminus, m.gminus);
  // The cone threshold guards the metric factors; their products only need
  // to stay positive.
  td.norm_sq = scale(add(div(tp2, mul(gp2, m.gminus), 0.0),
                         div(tm2, mul(m.gplus, gm2), 0.0)),
                     2.0);
  // Q = (1/2)|T|^2 g in this dimension.
  td.q_plus = scale(mul(td.norm_sq, m.gplus), 0.5);
  td.q_minus = scale(mul(td.norm_sq, m.gminus), 0.5);
  return td;
}

CurvatureForm rho_transgression(const ScalarField& det_field, double eps_pos) {
  require_positive(det_field, eps_pos, "transgression determinant");
  const ScalarField ld = log_field(det_field, eps_pos, "transgression determinant");
  CurvatureForm out;
  out.p_plus = scale(differentiate(ld, DiffOp::DzDzbar), -1.0);
  out.p_minus = scale(differentiate(ld, DiffOp::DwDwbar), -1.0);
  return out;
}

CurvatureForm p_split(const SplitMetric& m, double eps_pos) {
  require_admissible(m, eps_pos, "p_split");
  const ScalarField lr = sub(log_field(m.gplus, eps_pos, "gplus"),
                             log_field(m.gminus, eps_pos, "gminus"));
  CurvatureForm out;
  out.p_plus = scale(differentiate(lr, DiffOp::DzDzbar), -1.0);
  out.p_minus = differentiate(lr, DiffOp::DwDwbar);
  return out;
}

DirectCurvature p_direct(const SplitMetric& m, double eps_pos) {
  require_admissible(m, eps_pos, "p_direct");

  // Block arrays: index 0 is the plus block (holomorphic direction z),
  // index 1 the minus block (direction w).
  const ScalarField* gb[2] = {&m.gplus, &m.gminus};
  const DiffOp d1[2] = {DiffOp::Dz, DiffOp::Dw};
  const DiffOp d2[2] = {DiffOp::DzDzbar, DiffOp::DwDwbar};

  ScalarField dg[2][2];    // dg[b][i] = d_i g_b
  ScalarField lap[2][2];   // lap[b][i] = d_i d_ibar g_b
  ScalarField inv[2];
  for (int b = 0; b < 2; ++b) {
    inv[b] = div(ScalarField::constant(gb[b]->spec, 1.0), *gb[b], eps_pos);
    for (int i = 0; i < 2; ++i) {
      dg[b][i] = differentiate(*gb[b], d1[i]);
      lap[b][i] = differentiate(*gb[b], d2[i]);
    }
  }
  const ScalarField inv2[2] = {mul(inv[0], inv[0]), mul(inv[1], inv[1])};

  DirectCurvature out;
  // Diagonal slots: second-order block sum, then the three quadratic sums
  // with their index constraints written out.
  for (int i = 0; i < 2; ++i) {
    ScalarField bracket = ScalarField::zeros(m.gplus.spec);
    for (int p = 0; p < 2; ++p) bracket = add(bracket, mul(inv[p], lap[i][p]));
    // First quadratic sum: both blocks survive the diagonal contractions.
    for (int r = 0; r < 2; ++r) bracket = add(bracket, mul(inv2[r], abs2(dg[r][i])));
    // Second and third sums collapse onto the component's own block.
    bracket = sub(bracket, mul(inv2[i], abs2(dg[i][i])));
    bracket = sub(bracket, mul(inv2[i], abs2(dg[i][i])));
    ScalarField p_i = scale(bracket, -1.0);
    if (i == 0)
      out.form.p_plus = std::move(p_i);
    else
      out.form.p_minus = std::move(p_i);
  }

  // Mixed (z, wbar) slot: the second-order term carries the identically zero
  // off-diagonal coefficient; the three quadratic sums survive and must
  // cancel pointwise. dg[b][0] * conj(dg[b][1]) realizes d_z g_b * d_wbar g_b.
  ScalarField mixed = ScalarField::zeros(m.gplus.spec, FieldKind::Complex);
  for (int r = 0; r < 2; ++r)
    mixed = add(mixed, mul(inv2[r], mul_conj(dg[r][0], dg[r][1])));
  mixed = sub(mixed, mul(inv2[0], mul_conj(dg[0][0], dg[0][1])));
  mixed = sub(mixed, mul(inv2[1], mul_conj(dg[1][0], dg[1][1])));
  out.mixed = scale(mixed, -1.0);
  return out;
}

ScalarField chern_laplacian(const SplitMetric& m, const ScalarField& u,
                            double eps_pos) {
  require_admissible(m, eps_pos, "chern_laplacian");
  check_same_grid(m.gplus, u, "chern_laplacian");
  return add(div(differentiate(u, DiffOp::DzDzbar), m.gplus, eps_pos),
             div(differentiate(u, DiffOp::DwDwbar), m.gminus, eps_pos));
}

UpsilonNorms connection_difference(const SplitMetric& g, const SplitMetric& h,
                                   double eps_pos) {
  require_admissible(g, eps_pos, "connection_difference");
  require_admissible(h, eps_pos, "connection_difference reference");
  check_same_grid(g.gplus, h.gplus, "connection_difference");

  const ScalarField r_plus = sub(log_field(g.gplus, eps_pos, "gplus"),
                                 log_field(h.gplus, eps_pos, "hplus"));
  const ScalarField r_minus = sub(log_field(g.gminus, eps_pos, "gminus"),
                                  log_field(h.gminus, eps_pos, "hminus"));

  // bracket_s = g^{ibar i} |d_i r_s|^2 summed over both directions.
  auto bracket = [&](const ScalarField& r) {
    return add(div(abs2(differentiate(r, DiffOp::Dz)), g.gplus, eps_pos),
               div(abs2(differentiate(r, DiffOp::Dw)), g.gminus, eps_pos));
  };
  const ScalarField br_plus = bracket(r_plus);
  const ScalarField br_minus = bracket(r_minus);

  UpsilonNorms out;
  out.gg_h_plus = mul(div(h.gplus, g.gplus, eps_pos), br_plus);
  out.gg_h_minus = mul(div(h.gminus, g.gminus, eps_pos), br_minus);
  out.gh_g_plus = mul(div(g.gplus, h.gplus, eps_pos), br_plus);
  out.gh_g_minus = mul(div(g.gminus, h.gminus, eps_pos), br_minus);
  return out;
}

}  // namespace gkflow
