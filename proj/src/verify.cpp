#include "gkflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <utility>

#include "gkflow/spectral.hpp"

namespace gkflow {

namespace {

void need_snapshots(const Trajectory& traj) {
  if (traj.snaps.size() < 3)
    throw InsufficientSnapshots("time differencing needs at least 3 snapshots");
}

bool near_time(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

// First derivative at the middle of three samples with spacings h0, h1;
// exact on quadratics.
ScalarField time_derivative(const ScalarField& a, const ScalarField& b,
                            const ScalarField& c, double h0, double h1) {
  const double c0 = -h1 / (h0 * (h0 + h1));
  const double c1 = (h1 - h0) / (h0 * h1);
  const double c2 = h0 / (h1 * (h0 + h1));
  return add(add(scale(a, c0), scale(b, c1)), scale(c, c2));
}

bool degenerate_spacing(double h0, double h1) {
  return std::min(h0, h1) < 1e-3 * std::max(h0, h1);
}

bool field_is_constant(const ScalarField& f, double tol = 1e-12) {
  if (!f.is_real()) return false;
  const double m = mean(f);
  return sup_abs(offset(f, -m)) <= tol * std::max(1.0, std::abs(m));
}

bool background_is_flat(const Background& bg) {
  return field_is_constant(bg.hplus) && field_is_constant(bg.hminus) &&
         field_is_constant(bg.g0.gplus) && field_is_constant(bg.g0.gminus) &&
         sup_abs(bg.p_of_h.p_plus) <= 1e-10 &&
         sup_abs(bg.p_of_h.p_minus) <= 1e-10;
}

std::vector<SplitMetric> assemble_all(const Background& bg,
                                      const Trajectory& traj, double eps_pos) {
  std::vector<SplitMetric> ms;
  ms.reserve(traj.snaps.size());
  for (const Snapshot& sn : traj.snaps) {
    PotentialState s;
    s.t = sn.t;
    s.f = sn.f;
    ms.push_back(assemble_metric(bg, s, eps_pos));
  }
  return ms;
}

// field_at(i) -> tracked field; rhs_at(i, x_i) -> right-hand side at i.
template <class FieldAt, class RhsAt>
ResidualSeries residual_series(const char* name, const Trajectory& traj,
                               FieldAt&& field_at, RhsAt&& rhs_at) {
  ResidualSeries rs;
  rs.name = name;
  rs.dt_used = traj.snaps[1].t - traj.snaps[0].t;
  ScalarField prev = field_at(0);
  ScalarField cur = field_at(1);
  for (std::size_t i = 1; i + 1 < traj.snaps.size(); ++i) {
    ScalarField next = field_at(i + 1);
    const double h0 = traj.snaps[i].t - traj.snaps[i - 1].t;
    const double h1 = traj.snaps[i + 1].t - traj.snaps[i].t;
    if (!degenerate_spacing(h0, h1)) {
      const ScalarField lhs = time_derivative(prev, cur, next, h0, h1);
      rs.times.push_back(traj.snaps[i].t);
      rs.lhs_minus_rhs_sup.push_back(sup_abs(sub(lhs, rhs_at(i, cur))));
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return rs;
}

ResidualSeries merge_max(const char* name, const ResidualSeries& a,
                         const ResidualSeries& b) {
  ResidualSeries out = a;
  out.name = name;
  for (std::size_t i = 0; i < out.lhs_minus_rhs_sup.size(); ++i)
    out.lhs_minus_rhs_sup[i] =
        std::max(out.lhs_minus_rhs_sup[i], b.lhs_minus_rhs_sup[i]);
  return out;
}

double max_consecutive_increase(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    worst = std::max(worst, v[i] - v[i - 1]);
  return worst;
}

// Connection factors d log g+ + d log g- in the two holomorphic directions.
std::pair<ScalarField, ScalarField> holo_connection_sums(const SplitMetric& m,
                                                         double eps_pos) {
  const ScalarField gz = add(div(differentiate(m.gplus, DiffOp::Dz), m.gplus, eps_pos),
                             div(differentiate(m.gminus, DiffOp::Dz), m.gminus, eps_pos));
  const ScalarField gw = add(div(differentiate(m.gplus, DiffOp::Dw), m.gplus, eps_pos),
                             div(differentiate(m.gminus, DiffOp::Dw), m.gminus, eps_pos));
  return {gz, gw};
}

ScalarField covariant_laplacian_20(const SplitMetric& m, const ScalarField& beta,
                                   double eps_pos) {
  const auto [gz, gw] = holo_connection_sums(m, eps_pos);
  const ScalarField term_p =
      div(sub(differentiate(beta, DiffOp::DzDzbar),
              mul(gz, differentiate(beta, DiffOp::Dzbar))),
          m.gplus, eps_pos);
  const ScalarField term_m =
      div(sub(differentiate(beta, DiffOp::DwDwbar),
              mul(gw, differentiate(beta, DiffOp::Dwbar))),
          m.gminus, eps_pos);
  return add(term_p, term_m);
}

// Reaction terms of the two equivalent g+/h+ evolution forms.
ScalarField trace_hg_reaction(const SplitMetric& m, const SplitMetric& href,
                              double eps_pos) {
  const UpsilonNorms ups = connection_difference(m, href, eps_pos);
  const TorsionData td = torsion(m, eps_pos);
  return add(scale(ups.gh_g_plus, -1.0), div(td.q_plus, href.gplus, eps_pos));
}

ScalarField trace_hg_gradient_reaction(const SplitMetric& m,
                                       const SplitMetric& href,
                                       double eps_pos) {
  const ScalarField a =
      sub(add(log_field(m.gplus, eps_pos), log_field(href.gminus, eps_pos)),
          add(log_field(href.gplus, eps_pos), log_field(m.gminus, eps_pos)));
  const ScalarField b =
      sub(add(log_field(m.gplus, eps_pos), log_field(m.gminus, eps_pos)),
          add(log_field(href.gplus, eps_pos), log_field(href.gminus, eps_pos)));
  const ScalarField prod = real_part(
      mul(differentiate(a, DiffOp::Dz), differentiate(b, DiffOp::Dzbar)));
  return scale(div(prod, href.gplus, eps_pos), -1.0);
}

ScalarField heat_grad_sq(const SplitMetric& m, const ScalarField& u,
                         double eps_pos) {
  return add(div(abs2(differentiate(u, DiffOp::Dzbar)), m.gplus, eps_pos),
             div(abs2(differentiate(u, DiffOp::Dwbar)), m.gminus, eps_pos));
}

struct HeatIdentityTerms {
  ScalarField lap;           // Lap |dbar u|^2
  ScalarField conj_grad_sq;  // |conj-grad dbar u|^2
  ScalarField rhs;           // full right-hand side
};

HeatIdentityTerms heat_identity_terms(const SplitMetric& m, const ScalarField& u,
                                      double eps_pos) {
  const ScalarField& gp = m.gplus;
  const ScalarField& gm = m.gminus;
  const ScalarField gpgm = mul(gp, gm);
  const ScalarField gp2 = mul(gp, gp);
  const ScalarField gm2 = mul(gm, gm);

  const ScalarField bz = differentiate(u, DiffOp::Dzbar);
  const ScalarField bw = differentiate(u, DiffOp::Dwbar);
  const ScalarField x = add(div(abs2(bz), gp, eps_pos), div(abs2(bw), gm, eps_pos));
  const ScalarField lap = chern_laplacian(m, x, eps_pos);

  const ScalarField h_zzb = differentiate(u, DiffOp::DzDzbar);
  const ScalarField h_wwb = differentiate(u, DiffOp::DwDwbar);
  const ScalarField h_zwb = differentiate(bw, DiffOp::Dz);   // dz dwbar u
  const ScalarField h_wzb = differentiate(bz, DiffOp::Dw);   // dw dzbar u

  // Antiholomorphic log-gradients of the (real) metric components.
  const ScalarField azp = div(conj_field(differentiate(gp, DiffOp::Dz)), gp, eps_pos);
  const ScalarField azm = div(conj_field(differentiate(gm, DiffOp::Dz)), gm, eps_pos);
  const ScalarField awp = div(conj_field(differentiate(gp, DiffOp::Dw)), gp, eps_pos);
  const ScalarField awm = div(conj_field(differentiate(gm, DiffOp::Dw)), gm, eps_pos);

  const ScalarField nzz = sub(differentiate(bz, DiffOp::Dzbar), mul(azp, bz));
  const ScalarField nzw = sub(differentiate(bw, DiffOp::Dzbar), mul(azm, bw));
  const ScalarField nwz = sub(differentiate(bz, DiffOp::Dwbar), mul(awp, bz));
  const ScalarField nww = sub(differentiate(bw, DiffOp::Dwbar), mul(awm, bw));
  const ScalarField conj_grad_sq =
      add(add(div(abs2(nzz), gp2, 0.0), div(abs2(nzw), gpgm, 0.0)),
          add(div(abs2(nwz), gpgm, 0.0), div(abs2(nww), gm2, 0.0)));

  const ScalarField grad_grad_sq =
      add(add(div(abs2(h_zzb), gp2, 0.0), div(abs2(h_zwb), gpgm, 0.0)),
          add(div(abs2(h_wzb), gpgm, 0.0), div(abs2(h_wwb), gm2, 0.0)));

  const TorsionData td = torsion(m, eps_pos);
  const ScalarField qterm = add(mul(div(td.q_plus, gp2, 0.0), abs2(bz)),
                                mul(div(td.q_minus, gm2, 0.0), abs2(bw)));

  const ScalarField tmf = div(td.t_minus, gm, eps_pos);  // dz g- / g-
  const ScalarField tpf = div(td.t_plus, gp, eps_pos);   // dw g+ / g+
  const ScalarField tzb =
      div(add(mul(conj_field(scale(tmf, -1.0)), h_wwb),
              mul(conj_field(tpf), h_wzb)),
          gm, eps_pos);
  const ScalarField twb =
      div(add(mul(conj_field(tmf), h_zwb),
              mul(conj_field(scale(tpf, -1.0)), h_zzb)),
          gp, eps_pos);
  const ScalarField tterm =
      scale(real_part(add(div(mul(tzb, conj_field(bz)), gp, eps_pos),
                          div(mul(twb, conj_field(bw)), gm, eps_pos))),
            2.0);

  HeatIdentityTerms out{lap, conj_grad_sq, ScalarField{}};
  out.rhs = add(sub(sub(sub(lap, grad_grad_sq), conj_grad_sq), qterm), tterm);
  return out;
}

}  // namespace

std::array<ResidualSeries, 2> check_halfdet(const Background& bg,
                                            const Trajectory& traj,
                                            const SplitMetric& href,
                                            double eps_pos) {
  need_snapshots(traj);
  check_same_grid(bg.hplus, href.gplus, "halfdet reference");
  check_same_grid(bg.hplus, href.gminus, "halfdet reference");
  require_positive(href.gplus, eps_pos, "halfdet reference plus");
  require_positive(href.gminus, eps_pos, "halfdet reference minus");
  const std::vector<SplitMetric> ms = assemble_all(bg, traj, eps_pos);

  std::array<ResidualSeries, 2> out;
  for (int sign = 0; sign < 2; ++sign) {
    const ScalarField& h = sign == 0 ? href.gplus : href.gminus;
    const CurvatureForm rho = rho_transgression(h, eps_pos);
    const ScalarField logh = log_field(h, eps_pos, "halfdet reference");
    auto field_at = [&](std::size_t i) {
      const ScalarField& g = sign == 0 ? ms[i].gplus : ms[i].gminus;
      return sub(log_field(g, eps_pos, "halfdet metric"), logh);
    };
    auto rhs_at = [&](std::size_t i, const ScalarField& x) {
      const SplitMetric& m = ms[i];
      const TorsionData td = torsion(m, eps_pos);
      const ScalarField tr = add(div(rho.p_plus, m.gplus, eps_pos),
                                 div(rho.p_minus, m.gminus, eps_pos));
      return sub(add(chern_laplacian(m, x, eps_pos), scale(td.norm_sq, 0.5)),
                 tr);
    };
    out[sign] = residual_series(
        sign == 0 ? "log-det-ratio-plus" : "log-det-ratio-minus", traj,
        field_at, rhs_at);
  }
  return out;
}

std::array<ResidualSeries, 2> check_halfdet(const Background& bg,
                                            const Trajectory& traj,
                                            double eps_pos) {
  return check_halfdet(bg, traj, SplitMetric{bg.hplus, bg.hminus}, eps_pos);
}

ResidualSeries check_fdot(const Background& bg, const Trajectory& traj,
                          double eps_pos) {
  need_snapshots(traj);
  const std::vector<SplitMetric> ms = assemble_all(bg, traj, eps_pos);
  auto field_at = [&](std::size_t i) { return traj.snaps[i].fdot; };
  auto rhs_at = [&](std::size_t i, const ScalarField& fd) {
    const SplitMetric& m = ms[i];
    return add(sub(chern_laplacian(m, fd, eps_pos),
                   div(bg.p_of_h.p_plus, m.gplus, eps_pos)),
               div(bg.p_of_h.p_minus, m.gminus, eps_pos));
  };
  return residual_series("potential-rate", traj, field_at, rhs_at);
}

TorsionSourceTerms torsion_potential_source(const Background& bg,
                                            const SplitMetric& m, double t,
                                            double eps_pos) {
  const SplitMetric path = background_metric(bg, t);
  const ScalarField& gp = m.gplus;
  const ScalarField& gm = m.gminus;
  const ScalarField gpgm = mul(gp, gm);

  TorsionSourceTerms out;
  out.ref_cross_minus = differentiate(
      log_field(bg.hminus, eps_pos, "hminus"), DiffOp::DzDw);
  out.ref_cross_plus = scale(
      differentiate(log_field(bg.hplus, eps_pos, "hplus"), DiffOp::DzDw), -1.0);

  const ScalarField dw_bgp = differentiate(path.gplus, DiffOp::Dw);
  const ScalarField dz_bgm = differentiate(path.gminus, DiffOp::Dz);
  out.bg_cross_plus = div(differentiate(path.gplus, DiffOp::DzDw), gp, eps_pos);
  out.bg_grad_pp = scale(
      mul(div(differentiate(gp, DiffOp::Dz), mul(gp, gp), 0.0), dw_bgp),
      -1.0);
  out.bg_grad_pm = scale(
      mul(div(differentiate(gm, DiffOp::Dz), gpgm, 0.0), dw_bgp), -1.0);
  out.bg_cross_minus =
      scale(div(differentiate(path.gminus, DiffOp::DzDw), gm, eps_pos), -1.0);
  out.bg_grad_mm =
      mul(div(differentiate(gm, DiffOp::Dw), mul(gm, gm), 0.0), dz_bgm);
  out.bg_grad_mp = mul(div(differentiate(gp, DiffOp::Dw), gpgm, 0.0), dz_bgm);

  out.total = add(add(add(out.ref_cross_minus, out.ref_cross_plus),
                      add(out.bg_cross_plus, out.bg_grad_pp)),
                  add(add(out.bg_grad_pm, out.bg_cross_minus),
                      add(out.bg_grad_mm, out.bg_grad_mp)));
  return out;
}

ResidualSeries check_torsion_potential(const Background& bg,
                                       const Trajectory& traj,
                                       double eps_pos) {
  need_snapshots(traj);
  const std::vector<SplitMetric> ms = assemble_all(bg, traj, eps_pos);
  auto field_at = [&](std::size_t i) {
    return differentiate(traj.snaps[i].f, DiffOp::DzDw);
  };
  auto rhs_at = [&](std::size_t i, const ScalarField& beta) {
    const SplitMetric& m = ms[i];
    const TorsionSourceTerms src =
        torsion_potential_source(bg, m, traj.snaps[i].t, eps_pos);
    return add(covariant_laplacian_20(m, beta, eps_pos), src.total);
  };
  return residual_series("torsion-potential", traj, field_at, rhs_at);
}

NormEvolutionReport check_norm_evolution(const Background& bg,
                                         const Trajectory& traj,
                                         double drift_tol, double eps_pos) {
  need_snapshots(traj);
  if (!background_is_flat(bg))
    throw ConfigError("norm evolution check requires a flat background");
  const std::vector<SplitMetric> ms = assemble_all(bg, traj, eps_pos);

  auto field_at = [&](std::size_t i) {
    const ScalarField beta = differentiate(traj.snaps[i].f, DiffOp::DzDw);
    return div(abs2(beta), mul(ms[i].gplus, ms[i].gminus), 0.0);
  };
  auto rhs_at = [&](std::size_t i, const ScalarField& x) {
    const SplitMetric& m = ms[i];
    const ScalarField gpgm = mul(m.gplus, m.gminus);
    const ScalarField beta = differentiate(traj.snaps[i].f, DiffOp::DzDw);
    const auto [gz, gw] = holo_connection_sums(m, eps_pos);
    const ScalarField covz = sub(differentiate(beta, DiffOp::Dz), mul(gz, beta));
    const ScalarField covw = sub(differentiate(beta, DiffOp::Dw), mul(gw, beta));
    const ScalarField grad_sq =
        div(add(div(abs2(covz), m.gplus, eps_pos),
                div(abs2(covw), m.gminus, eps_pos)),
            gpgm, 0.0);
    const ScalarField conj_grad_sq =
        div(add(div(abs2(differentiate(beta, DiffOp::Dzbar)), m.gplus, eps_pos),
                div(abs2(differentiate(beta, DiffOp::Dwbar)), m.gminus, eps_pos)),
            gpgm, 0.0);
    const TorsionData td = torsion(m, eps_pos);
    const ScalarField qterm = mul(add(div(td.q_plus, m.gplus, eps_pos),
                                      div(td.q_minus, m.gminus, eps_pos)),
                                  x);
    return sub(sub(sub(chern_laplacian(m, x, eps_pos), conj_grad_sq), grad_sq),
               qterm);
  };

  NormEvolutionReport rep;
  rep.residual =
      residual_series("torsion-potential-norm", traj, field_at, rhs_at);
  if (!traj.monitors.sup_torsion_potential_sq.empty()) {
    rep.max_sup_increase =
        max_consecutive_increase(traj.monitors.sup_torsion_potential_sq);
  } else {
    std::vector<double> sups;
    sups.reserve(traj.snaps.size());
    for (std::size_t i = 0; i < traj.snaps.size(); ++i)
      sups.push_back(sup(field_at(i)));
    rep.max_sup_increase = max_consecutive_increase(sups);
  }
  rep.monotone = rep.max_sup_increase <= drift_tol;
  return rep;
}

std::array<ResidualSeries, 3> check_trace_identities(const Background& bg,
                                                     const Trajectory& traj,
                                                     double eps_pos) {
  need_snapshots(traj);
  if (!field_is_constant(bg.hplus) || !field_is_constant(bg.hminus))
    throw ConfigError("trace identity checks require constant reference metrics");
  const SplitMetric href{bg.hplus, bg.hminus};
  const std::vector<SplitMetric> ms = assemble_all(bg, traj, eps_pos);

  auto series_for = [&](const char* name, int sign, bool inverse) {
    const ScalarField& h = sign == 0 ? href.gplus : href.gminus;
    auto field_at = [&, sign, inverse](std::size_t i) {
      const ScalarField& g = sign == 0 ? ms[i].gplus : ms[i].gminus;
      return inverse ? div(h, g, eps_pos) : div(g, h, eps_pos);
    };
    auto rhs_at = [&, sign, inverse](std::size_t i, const ScalarField& x) {
      const SplitMetric& m = ms[i];
      const ScalarField& g = sign == 0 ? m.gplus : m.gminus;
      const UpsilonNorms ups = connection_difference(m, href, eps_pos);
      const TorsionData td = torsion(m, eps_pos);
      const ScalarField& q = sign == 0 ? td.q_plus : td.q_minus;
      ScalarField reaction;
      if (inverse) {
        const ScalarField& up = sign == 0 ? ups.gg_h_plus : ups.gg_h_minus;
        reaction = scale(add(up, div(mul(h, q), mul(g, g), 0.0)), -1.0);
      } else {
        const ScalarField& up = sign == 0 ? ups.gh_g_plus : ups.gh_g_minus;
        reaction = sub(div(q, h, eps_pos), up);
      }
      return add(chern_laplacian(m, x, eps_pos), reaction);
    };
    return residual_series(name, traj, field_at, rhs_at);
  };

  std::array<ResidualSeries, 3> out;
  out[0] = merge_max("trace-gh", series_for("trace-gh-plus", 0, true),
                     series_for("trace-gh-minus", 1, true));
  out[1] = merge_max("trace-hg", series_for("trace-hg-plus", 0, false),
                     series_for("trace-hg-minus", 1, false));

  auto field_at = [&](std::size_t i) {
    return div(ms[i].gplus, href.gplus, eps_pos);
  };
  auto rhs_at = [&](std::size_t i, const ScalarField& x) {
    return add(chern_laplacian(ms[i], x, eps_pos),
               trace_hg_gradient_reaction(ms[i], href, eps_pos));
  };
  out[2] =
      residual_series("trace-hg-gradient-form", traj, field_at, rhs_at);
  return out;
}

double trace_form_disagreement(const Background& bg, const Trajectory& traj,
                               double eps_pos) {
  need_snapshots(traj);
  if (!field_is_constant(bg.hplus) || !field_is_constant(bg.hminus))
    throw ConfigError("trace identity checks require constant reference metrics");
  const SplitMetric href{bg.hplus, bg.hminus};
  const std::vector<SplitMetric> ms = assemble_all(bg, traj, eps_pos);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < ms.size(); ++i) {
    const ScalarField diff = sub(trace_hg_reaction(ms[i], href, eps_pos),
                                 trace_hg_gradient_reaction(ms[i], href, eps_pos));
    worst = std::max(worst, sup_abs(diff));
  }
  return worst;
}

HeatRun coupled_heat(const Background& bg, const Trajectory& traj,
                     const ScalarField& u0, const HeatOptions& opt) {
  if (traj.snaps.size() < 2)
    throw InsufficientSnapshots("coupled heat needs a trajectory with a time span");
  if (!u0.is_real()) throw ConfigError("heat initial data must be real");
  check_same_grid(bg.hplus, u0, "coupled heat");
  const double eps_pos = opt.eps_pos;
  if (opt.residual_stride < 1)
    throw ConfigError("residual_stride must be positive");

  const double t0 = traj.snaps.front().t;
  const double t1 = traj.snaps.back().t;
  double t = t0;
  ScalarField f = traj.snaps.front().f;
  ScalarField u = u0;

  auto stage = [&](double ts, const ScalarField& fs, const ScalarField& us)
      -> std::pair<ScalarField, ScalarField> {
    PotentialState s;
    s.t = ts;
    s.f = fs;
    const SplitMetric m = assemble_metric(bg, s, eps_pos);
    const ScalarField fd =
        add(sub(log_field(m.gplus, eps_pos, "gplus"),
                log_field(m.gminus, eps_pos, "gminus")),
            bg.log_h_ratio);
    return {fd, chern_laplacian(m, us, eps_pos)};
  };

  struct Sample {
    double t;
    ScalarField x;
    ScalarField f;
    ScalarField u;
  };
  std::deque<Sample> ring;

  HeatRun run;
  run.identity_residual.name = "heat-gradient";
  long k = 0;
  while (true) {
    PotentialState s;
    s.t = t;
    s.f = f;
    const SplitMetric m = assemble_metric(bg, s, eps_pos);
    ScalarField x = heat_grad_sq(m, u, eps_pos);
    run.times.push_back(t);
    run.sup_grad_sq.push_back(sup(x));
    ring.push_back(Sample{t, std::move(x), f, u});
    if (ring.size() > 3) ring.pop_front();
    if (ring.size() == 3 && (k - 1) % opt.residual_stride == 0) {
      const Sample& a = ring[0];
      const Sample& b = ring[1];
      const Sample& c = ring[2];
      const double h0 = b.t - a.t;
      const double h1 = c.t - b.t;
      if (!degenerate_spacing(h0, h1)) {
        const ScalarField lhs = time_derivative(a.x, b.x, c.x, h0, h1);
        PotentialState sb;
        sb.t = b.t;
        sb.f = b.f;
        const SplitMetric mb = assemble_metric(bg, sb, eps_pos);
        const HeatIdentityTerms terms = heat_identity_terms(mb, b.u, eps_pos);
        run.identity_residual.times.push_back(b.t);
        run.identity_residual.lhs_minus_rhs_sup.push_back(
            sup_abs(sub(lhs, terms.rhs)));
        run.max_sign_violation = std::max(
            run.max_sign_violation,
            sup(add(sub(lhs, terms.lap), terms.conj_grad_sq)));
      }
    }
    if (near_time(t, t1)) break;

    double dt = opt.fixed_dt > 0.0 ? opt.fixed_dt
                                   : opt.sigma_cfl / cfl_lambda_max(m, eps_pos);
    dt = std::min(dt, t1 - t);
    const auto [k1f, k1u] = stage(t, f, u);
    const double th = t + 0.5 * dt;
    const auto [k2f, k2u] =
        stage(th, add(f, scale(k1f, 0.5 * dt)), add(u, scale(k1u, 0.5 * dt)));
    const auto [k3f, k3u] =
        stage(th, add(f, scale(k2f, 0.5 * dt)), add(u, scale(k2u, 0.5 * dt)));
    const auto [k4f, k4u] =
        stage(t + dt, add(f, scale(k3f, dt)), add(u, scale(k3u, dt)));
    f = add(f, scale(add(add(k1f, k4f), scale(add(k2f, k3f), 2.0)), dt / 6.0));
    u = add(u, scale(add(add(k1u, k4u), scale(add(k2u, k3u), 2.0)), dt / 6.0));
    require_finite(u, "heat solution");
    if (k == 0) run.identity_residual.dt_used = dt;
    t += dt;
    if (near_time(t, t1)) t = t1;
    ++k;
  }

  run.max_sup_increase = max_consecutive_increase(run.sup_grad_sq);
  for (double r : run.identity_residual.lhs_minus_rhs_sup)
    run.identity_sup = std::max(run.identity_sup, r);
  run.t_final = t;
  run.u_final = std::move(u);
  return run;
}

SplitMetric random_admissible_metric(const GridSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(1.5, 2.5);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);

  // Separable strictly positive base: g+ wiggles along the first holomorphic
  // pair, g- along the second, so the pair is admissible before deformation.
  // Amplitudes are kept small against the base so the log of the pair is
  // numerically band limited: the comparison target differentiates log g,
  // whose spectral tail decays like (amplitude/base)^(k/kmax).
  const double cp = base(rng);
  const double cm = base(rng);
  const int kmax = 2;

  ScalarField phi = ScalarField::zeros(spec);
  ScalarField ap = ScalarField::zeros(spec);
  ScalarField bm = ScalarField::zeros(spec);
  double pot_budget = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    const double wz = kTwoPi * k / spec.period[0];
    const double ww = kTwoPi * k / spec.period[2];
    const double ca = 0.02 * amp(rng);
    const double cb = 0.02 * amp(rng);
    const double pa = phase(rng), pb = phase(rng);
    const double cphi = 0.02 * amp(rng);
    const double pz = phase(rng), pw = phase(rng);
    for (std::size_t i = 0; i < spec.samples(); ++i) {
      const auto x = point_at(spec, i);
      ap.re[i] += ca * std::cos(wz * x[0] + pa);
      bm.re[i] += cb * std::cos(ww * x[2] + pb);
      phi.re[i] +=
          cphi * std::cos(wz * x[0] + pz) * std::cos(ww * x[2] + pw);
    }
    // |DzDzbar phi| <= wz^2/4 |cphi| and the mirror bound on the other leg.
    pot_budget += 0.25 * std::abs(cphi) * std::max(wz * wz, ww * ww);
  }
  // Shrink the deformation so both signs keep a unit floor under the
  // separable base minus its own wiggle budget.
  const double floor_gap = std::min(cp, cm) - 0.02 * kmax - 1.0;
  if (pot_budget > floor_gap && pot_budget > 0.0) {
    phi = scale(phi, floor_gap / pot_budget);
  }

  SplitMetric m;
  m.gplus = add(offset(ap, cp), differentiate(phi, DiffOp::DzDzbar));
  m.gminus = sub(offset(bm, cm), differentiate(phi, DiffOp::DwDwbar));
  require_admissible(m, kDefaultEpsPos, "random admissible pair");
  return m;
}

CurvatureProbe curvature_identity_probe(const GridSpec& spec,
                                        std::uint64_t seed, double eps_pos) {
  const SplitMetric m = random_admissible_metric(spec, seed);
  const CurvatureForm ps = p_split(m, eps_pos);
  const DirectCurvature pd = p_direct(m, eps_pos);

  double denom = 1.0;
  denom = std::max(denom, sup_abs(pd.form.p_plus));
  denom = std::max(denom, sup_abs(pd.form.p_minus));
  const double num = std::max(sup_abs(sub(ps.p_plus, pd.form.p_plus)),
                              sup_abs(sub(ps.p_minus, pd.form.p_minus)));

  CurvatureProbe probe;
  probe.rel_diff = num / denom;
  probe.mixed_sup = sup_abs(pd.mixed);
  return probe;
}

MonitorSeries monitor_estimates(const Background& bg, const Trajectory& traj,
                                double mub_A, double eps_pos) {
  MonitorSeries ms;
  for (const Snapshot& sn : traj.snaps) {
    PotentialState s;
    s.t = sn.t;
    s.f = sn.f;
    const SplitMetric m = assemble_metric(bg, s, eps_pos);
    append_monitor_row(bg, m, sn.f, sn.fdot, sn.t, mub_A, eps_pos, ms);
  }
  finalize_monitor_constants(ms);
  return ms;
}

}  // namespace gkflow
