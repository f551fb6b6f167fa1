#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "gkflow/config.hpp"
#include "gkflow/scenario.hpp"
#include "gkflow/spectral.hpp"
#include "gkflow/verify.hpp"

using namespace gkflow;

namespace {

double sup_diff(const ScalarField& a, const ScalarField& b) { return sup_abs(sub(a, b)); }

double series_max(const ResidualSeries& s) {
  double r = 0.0;
  for (double v : s.lhs_minus_rhs_sup) r = std::max(r, v);
  return r;
}

struct Lab {
  Background bg;
  Trajectory traj;
};

// mixed-mode potential run with uniformly spaced snapshots
Lab mixed_run(double fixed_dt, int stride, double t_end) {
  RunConfig cfg;
  cfg.scenario = Scenario::GenericPotential;
  cfg.grid = GridSpec::reduced(16, 16);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = t_end;
  opt.ctl.fixed_dt = fixed_dt;
  opt.snapshot_stride = stride;
  Lab lab{set.bg, evolve(set.bg, set.s0, opt)};
  REQUIRE(lab.traj.completed);
  return lab;
}

Lab conformal_run() {
  RunConfig cfg;
  cfg.scenario = Scenario::ConformalBackground;
  cfg.grid = GridSpec::reduced(16, 16);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 0.08;
  opt.ctl.fixed_dt = 0.004;
  opt.snapshot_stride = 4;
  return {set.bg, evolve(set.bg, set.s0, opt)};
}

void check_second_order(double coarse, double fine, const char* what) {
  INFO(what << ": coarse " << coarse << " fine " << fine);
  CHECK(coarse > 1e-12);  // measurably above the roundoff floor
  const double slope = std::log2(coarse / fine);
  CHECK(slope > 1.7);
  CHECK(slope < 2.6);
}

}  // namespace

TEST_CASE("evolution identity residuals shrink at second order") {
  Lab coarse = mixed_run(0.004, 4, 0.128);
  Lab fine = mixed_run(0.002, 4, 0.128);

  auto hd_c = check_halfdet(coarse.bg, coarse.traj);
  auto hd_f = check_halfdet(fine.bg, fine.traj);
  check_second_order(series_max(hd_c[0]), series_max(hd_f[0]), "half-det plus");
  check_second_order(series_max(hd_c[1]), series_max(hd_f[1]), "half-det minus");
  CHECK(hd_c[0].dt_used == doctest::Approx(0.016).epsilon(1e-12));

  check_second_order(series_max(check_fdot(coarse.bg, coarse.traj)),
                     series_max(check_fdot(fine.bg, fine.traj)), "potential rate");

  check_second_order(series_max(check_torsion_potential(coarse.bg, coarse.traj)),
                     series_max(check_torsion_potential(fine.bg, fine.traj)),
                     "torsion potential");

  NormEvolutionReport nr_c = check_norm_evolution(coarse.bg, coarse.traj);
  NormEvolutionReport nr_f = check_norm_evolution(fine.bg, fine.traj);
  check_second_order(series_max(nr_c.residual), series_max(nr_f.residual),
                     "torsion norm");
  CHECK(nr_c.monotone);
  CHECK(nr_c.max_sup_increase <= 1e-8);

  auto tr_c = check_trace_identities(coarse.bg, coarse.traj);
  auto tr_f = check_trace_identities(fine.bg, fine.traj);
  check_second_order(series_max(tr_c[0]), series_max(tr_f[0]), "trace h/g");
  check_second_order(series_max(tr_c[1]), series_max(tr_f[1]), "trace g/h");
  check_second_order(series_max(tr_c[2]), series_max(tr_f[2]), "trace gradient form");

  NormalizedTrajectory nt_c = normalize_trajectory(coarse.bg, coarse.traj);
  NormalizedTrajectory nt_f = normalize_trajectory(fine.bg, fine.traj);
  check_second_order(series_max(nt_c.residual), series_max(nt_f.residual),
                     "normalized flow");
}

TEST_CASE("half-det residual is insensitive to a constant reference pair") {
  Lab lab = mixed_run(0.004, 4, 0.128);
  auto own = check_halfdet(lab.bg, lab.traj);
  GridSpec g = lab.traj.snaps.front().f.spec;
  SplitMetric href{ScalarField::constant(g, 1.3), ScalarField::constant(g, 0.7)};
  auto other = check_halfdet(lab.bg, lab.traj, href);
  for (int s = 0; s < 2; ++s) {
    REQUIRE(own[s].lhs_minus_rhs_sup.size() == other[s].lhs_minus_rhs_sup.size());
    for (std::size_t k = 0; k < own[s].lhs_minus_rhs_sup.size(); ++k)
      CHECK(std::abs(own[s].lhs_minus_rhs_sup[k] - other[s].lhs_minus_rhs_sup[k]) < 1e-12);
  }
}

TEST_CASE("mixed-derivative source vanishes term by term on a flat background") {
  Lab lab = mixed_run(0.004, 4, 0.128);
  const Snapshot& snap = lab.traj.snaps[lab.traj.snaps.size() / 2];
  PotentialState s;
  s.t = snap.t;
  s.f = snap.f;
  SplitMetric m = assemble_metric(lab.bg, s);
  TorsionSourceTerms ts = torsion_potential_source(lab.bg, m, snap.t);
  CHECK(sup_abs(ts.ref_cross_minus) < 1e-12);
  CHECK(sup_abs(ts.ref_cross_plus) < 1e-12);
  CHECK(sup_abs(ts.bg_cross_plus) < 1e-12);
  CHECK(sup_abs(ts.bg_grad_pp) < 1e-12);
  CHECK(sup_abs(ts.bg_grad_pm) < 1e-12);
  CHECK(sup_abs(ts.bg_cross_minus) < 1e-12);
  CHECK(sup_abs(ts.bg_grad_mm) < 1e-12);
  CHECK(sup_abs(ts.bg_grad_mp) < 1e-12);
  CHECK(sup_abs(ts.total) < 1e-12);
}

TEST_CASE("structural guards of the specialized checks") {
  Lab conf = conformal_run();
  CHECK_THROWS_AS(check_norm_evolution(conf.bg, conf.traj), ConfigError);
  CHECK_THROWS_AS(check_trace_identities(conf.bg, conf.traj), ConfigError);
  // the generic checks still apply there
  CHECK(series_max(check_fdot(conf.bg, conf.traj)) < 1e-3);
}

TEST_CASE("the two reaction forms of the trace evolution agree pointwise") {
  Lab lab = mixed_run(0.004, 4, 0.128);
  CHECK(trace_form_disagreement(lab.bg, lab.traj) < 1e-12);
}

TEST_CASE("coupled heat flow reproduces the product-metric decay") {
  RunConfig cfg;
  cfg.grid = GridSpec::reduced(16, 16);
  ScenarioSetup set = build_scenario(cfg);  // flat stationary geometry
  EvolveOptions opt;
  opt.t_end = 1.0;
  Trajectory traj = evolve(set.bg, set.s0, opt);

  GridSpec g = cfg.grid;
  ScalarField u0 = ScalarField::sample(
      g, [](double x1, double, double, double) { return std::cos(x1); });
  HeatRun hr = coupled_heat(set.bg, traj, u0);

  CHECK(hr.t_final == doctest::Approx(1.0).epsilon(1e-14));
  // u(t) = e^{-t/4} cos x1 on the unit product metric
  ScalarField want = scale(u0, std::exp(-0.25));
  CHECK(sup_diff(hr.u_final, want) < 1e-9);
  // sup |dbar u|^2 = (1/4) e^{-t/2}
  REQUIRE(!hr.sup_grad_sq.empty());
  CHECK(hr.sup_grad_sq.front() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(hr.sup_grad_sq.back() ==
        doctest::Approx(0.25 * std::exp(-0.5 * hr.t_final)).epsilon(1e-9));
  CHECK(hr.max_sup_increase <= 1e-12);
  CHECK(hr.identity_sup < 1e-3);  // pure snapshot-differencing error
  CHECK(hr.identity_sup > 0.0);
  CHECK(hr.max_sign_violation < 1e-3);
}

TEST_CASE("coupled heat flow handles degenerate inputs") {
  RunConfig cfg;
  cfg.grid = GridSpec::reduced(16, 16);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 0.5;
  Trajectory traj = evolve(set.bg, set.s0, opt);

  HeatRun hr = coupled_heat(set.bg, traj, ScalarField::constant(cfg.grid, 3.0));
  CHECK(sup_diff(hr.u_final, ScalarField::constant(cfg.grid, 3.0)) < 1e-13);
  for (double v : hr.sup_grad_sq) CHECK(v < 1e-14);
  CHECK(hr.identity_sup < 1e-12);
  CHECK(hr.max_sup_increase == 0.0);

  ScalarField cplx = ScalarField::zeros(cfg.grid, FieldKind::Complex);
  CHECK_THROWS_AS(coupled_heat(set.bg, traj, cplx), ConfigError);
}

TEST_CASE("monitor rows re-derived from snapshots match the live recording") {
  RunConfig cfg;
  cfg.scenario = Scenario::GenericPotential;
  cfg.grid = GridSpec::reduced(16, 16);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 0.2;
  opt.ctl.fixed_dt = 0.01;
  opt.snapshot_stride = 2;
  opt.monitor_dt = 0.02;  // aligned with the snapshot cadence
  Trajectory traj = evolve(set.bg, set.s0, opt);

  MonitorSeries est = monitor_estimates(set.bg, traj);
  REQUIRE(est.times.size() == traj.snaps.size());
  REQUIRE(traj.monitors.times.size() == est.times.size());
  for (std::size_t k = 0; k < est.times.size(); ++k) {
    CHECK(est.times[k] == doctest::Approx(traj.monitors.times[k]).epsilon(1e-14));
    CHECK(est.sup_f[k] == doctest::Approx(traj.monitors.sup_f[k]).epsilon(1e-12));
    CHECK(est.sup_fdot[k] == doctest::Approx(traj.monitors.sup_fdot[k]).epsilon(1e-12));
    CHECK(est.phi_mub[k] == doctest::Approx(traj.monitors.phi_mub[k]).epsilon(1e-12));
    CHECK(est.min_gplus[k] == doctest::Approx(traj.monitors.min_gplus[k]).epsilon(1e-12));
  }
  CHECK(est.c_f == doctest::Approx(traj.monitors.c_f).epsilon(1e-12));
  CHECK(est.c_fdot == doctest::Approx(traj.monitors.c_fdot).epsilon(1e-12));
  CHECK(est.c_phi == doctest::Approx(traj.monitors.c_phi).epsilon(1e-12));
}

TEST_CASE("random admissible pairs are reproducible and admissible") {
  GridSpec g = GridSpec::reduced(32, 32);
  SplitMetric a = random_admissible_metric(g, 7);
  SplitMetric b = random_admissible_metric(g, 7);
  CHECK(a.gplus.re == b.gplus.re);
  CHECK(a.gminus.re == b.gminus.re);
  SplitMetric c = random_admissible_metric(g, 8);
  CHECK(sup_diff(a.gplus, c.gplus) > 1e-4);
  CHECK_NOTHROW(require_admissible(a, 0.5, "draw floor"));  // unit floor by design
}

TEST_CASE("the two curvature computations agree on random pairs") {
  GridSpec g = GridSpec::reduced(32, 32);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    CurvatureProbe probe = curvature_identity_probe(g, seed);
    INFO("seed " << seed << " rel " << probe.rel_diff << " mixed " << probe.mixed_sup);
    CHECK(probe.rel_diff < 1e-9);
    CHECK(probe.mixed_sup < 1e-10);
  }
}

TEST_CASE("constant-ratio references drive exact linear growth") {
  GridSpec g = GridSpec::reduced(16, 16);
  ScalarField one = ScalarField::constant(g, 1.0);
  Background bg = make_background(SplitMetric{one, one},
                                  ScalarField::constant(g, 0.9), one);
  PotentialState s;
  s.f = ScalarField::zeros(g);
  EvolveOptions opt;
  opt.t_end = 1.0;
  Trajectory traj = evolve(bg, s, opt);
  REQUIRE(traj.completed);
  const double c = std::log(1.0 / 0.9);
  CHECK(sup_diff(traj.snaps.back().f, ScalarField::constant(g, c)) < 1e-12);
  CHECK(traj.monitors.c_fdot == doctest::Approx(c).epsilon(1e-12));
}
