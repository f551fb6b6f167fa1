// Acceptance gate: one pass/fail line per criterion, exit 0 only when all
// pass. Oracles are independent of the library paths they certify.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "gkflow/config.hpp"
#include "gkflow/flow.hpp"
#include "gkflow/geometry.hpp"
#include "gkflow/grid.hpp"
#include "gkflow/scenario.hpp"
#include "gkflow/verify.hpp"

using namespace gkflow;

namespace {

struct Line {
  bool pass = false;
  std::string detail;
};

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Largest positive jump between consecutive entries.
double max_rise(const std::vector<double>& v) {
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) d = std::max(d, v[i + 1] - v[i]);
  return d;
}

double max_fall(const std::vector<double>& v) {
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) d = std::max(d, v[i] - v[i + 1]);
  return d;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---- independent single-factor oracle --------------------------------------
// d phi/dt = log(1 + phi''/4) on N periodic samples, second derivative via a
// naive O(N^2) DFT pair, classical RK4 at a fixed step. Shares no code with
// the library solver.

struct Dft1D {
  std::size_t n;
  std::vector<std::complex<double>> w;  // w[j] = exp(2 pi i j / n)
  explicit Dft1D(std::size_t n_) : n(n_), w(n_) {
    for (std::size_t j = 0; j < n; ++j)
      w[j] = std::polar(1.0, 2.0 * M_PI * double(j) / double(n));
  }
  std::vector<double> second_derivative(const std::vector<double>& v) const {
    std::vector<std::complex<double>> hat(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += v[j] * std::conj(w[(j * k) % n]);
      double m = k <= n / 2 ? double(k) : double(k) - double(n);
      hat[k] = -(m * m) * s;
    }
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::complex<double> s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += hat[k] * w[(j * k) % n];
      out[j] = s.real() / double(n);
    }
    return out;
  }
};

std::vector<double> oracle_rhs(const Dft1D& dft, const std::vector<double>& v) {
  std::vector<double> dd = dft.second_derivative(v);
  for (std::size_t j = 0; j < v.size(); ++j) dd[j] = std::log1p(0.25 * dd[j]);
  return dd;
}

std::vector<double> oracle_evolve(std::vector<double> v, double t_end, double dt) {
  Dft1D dft(v.size());
  const std::size_t n = v.size();
  long steps = std::lround(t_end / dt);
  for (long s = 0; s < steps; ++s) {
    std::vector<double> k1 = oracle_rhs(dft, v), tmp(n);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = v[j] + 0.5 * dt * k1[j];
    std::vector<double> k2 = oracle_rhs(dft, tmp);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = v[j] + 0.5 * dt * k2[j];
    std::vector<double> k3 = oracle_rhs(dft, tmp);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = v[j] + dt * k3[j];
    std::vector<double> k4 = oracle_rhs(dft, tmp);
    for (std::size_t j = 0; j < n; ++j)
      v[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return v;
}

// ---- criteria ---------------------------------------------------------------

Line curvature_identity_agreement() {
  GridSpec g = GridSpec::reduced(64, 64);
  double rel = 0.0, mixed = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CurvatureProbe pr = curvature_identity_probe(g, seed);
    rel = std::max(rel, pr.rel_diff);
    mixed = std::max(mixed, pr.mixed_sup);
  }
  return {rel < 1e-9 && mixed < 1e-10,
          fmt("20 draws: rel %.3g (tol 1e-9), mixed slot %.3g (tol 1e-10)", rel, mixed)};
}

Line flat_fixed_point() {
  RunConfig cfg;
  cfg.scenario = Scenario::FlatStationary;
  cfg.grid = GridSpec::reduced(32, 32);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 1.0;
  Trajectory tr = evolve(set.bg, set.s0, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.monitors.times.size(); ++i)
    worst = std::max(worst, std::max(std::abs(tr.monitors.sup_f[i]),
                                     std::abs(tr.monitors.inf_f[i])));
  return {tr.completed && worst < 1e-12,
          fmt("sup|f| over the run %.3g (tol 1e-12)", worst)};
}

Line single_factor_reduction_oracle() {
  RunConfig cfg;
  cfg.scenario = Scenario::KahlerReduction;
  cfg.grid = GridSpec::reduced(64, 64);
  ScenarioSetup set = build_scenario(cfg);

  EvolveOptions opt;
  opt.t_end = 1.0;
  opt.ctl.sigma_cfl = 0.5;
  opt.monitor_dt = 0.1;
  Trajectory tr = evolve(set.bg, set.s0, opt);
  if (!tr.completed) return {false, "t=1 run did not complete"};

  const std::size_t n1 = 64;
  std::vector<double> phi(n1);
  for (std::size_t j = 0; j < n1; ++j)
    phi[j] = 0.3 * std::cos(2.0 * (kTwoPi * double(j) / double(n1)));
  phi = oracle_evolve(phi, 1.0, 2.5e-4);

  const ScalarField& f1 = tr.snaps.back().f;
  const std::size_t n3 = 64;
  double dev = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i)
    dev = std::max(dev, std::abs(f1.re[i] - phi[i / n3]));

  PotentialState s1;
  s1.t = tr.snaps.back().t;
  s1.f = f1;
  SplitMetric m1 = assemble_metric(set.bg, s1);
  double gm_dev = sup_abs(offset(m1.gminus, -1.0));

  EvolveOptions long_opt;
  long_opt.t_end = 5.0;
  long_opt.ctl.sigma_cfl = 1.0;
  long_opt.monitor_dt = 0.5;
  Trajectory tr5 = evolve(set.bg, set.s0, long_opt);
  SplitMetric m0 = assemble_metric(set.bg, set.s0);
  PotentialState s5;
  s5.t = tr5.snaps.back().t;
  s5.f = tr5.snaps.back().f;
  SplitMetric m5 = assemble_metric(set.bg, s5);
  double dev0 = sup_abs(offset(m0.gplus, -mean(m0.gplus)));
  double dev5 = sup_abs(offset(m5.gplus, -mean(m5.gplus)));

  bool ok = dev < 1e-8 && gm_dev < 1e-12 && dev5 < 0.1 * dev0;
  return {ok, fmt("t=1 vs oracle %.3g (tol 1e-8); t=5 contraction %.3g of initial (tol 0.1)",
                  dev, dev5 / dev0)};
}

struct LadderResult {
  std::vector<Trajectory> trajs;     // one per dt level
  std::vector<double> envelope;      // per level: max residual over all series
  Background bg;
  bool pass = false;
  std::string detail;
};

LadderResult evolution_identity_refinement() {
  LadderResult out;
  RunConfig cfg;
  cfg.scenario = Scenario::GenericPotential;
  cfg.grid = GridSpec::reduced(64, 64);
  ScenarioSetup set = build_scenario(cfg);
  out.bg = set.bg;

  const int levels = 4;
  // seven residual series per level: half-determinant pair (merged), rate of
  // the potential, torsion potential, its norm, and the three trace forms
  std::vector<std::vector<double>> series(7, std::vector<double>(levels, 0.0));
  const char* names[7] = {"half-determinant", "potential-rate", "torsion-potential",
                          "torsion-potential-norm", "trace-of-reference",
                          "trace-of-metric", "trace-gradient-form"};
  out.envelope.assign(levels, 0.0);

  for (int l = 0; l < levels; ++l) {
    EvolveOptions opt;
    opt.t_end = 0.256;
    opt.ctl.fixed_dt = 2e-3 / double(1 << l);
    opt.snapshot_stride = 4;
    opt.monitor_dt = 0.128;
    Trajectory tr = evolve(set.bg, set.s0, opt);
    if (!tr.completed) {
      out.detail = "refinement run did not complete";
      return out;
    }
    auto hd = check_halfdet(set.bg, tr);
    series[0][l] = std::max(max_of(hd[0].lhs_minus_rhs_sup), max_of(hd[1].lhs_minus_rhs_sup));
    series[1][l] = max_of(check_fdot(set.bg, tr).lhs_minus_rhs_sup);
    series[2][l] = max_of(check_torsion_potential(set.bg, tr).lhs_minus_rhs_sup);
    series[3][l] = max_of(check_norm_evolution(set.bg, tr).residual.lhs_minus_rhs_sup);
    auto tri = check_trace_identities(set.bg, tr);
    for (int k = 0; k < 3; ++k) series[4 + k][l] = max_of(tri[k].lhs_minus_rhs_sup);
    for (int s = 0; s < 7; ++s) out.envelope[l] = std::max(out.envelope[l], series[s][l]);
    out.trajs.push_back(std::move(tr));
  }

  double min_slope = 1e9;
  const char* worst = "";
  for (int s = 0; s < 7; ++s) {
    for (int l = 0; l + 1 < levels; ++l) {
      if (series[s][l + 1] <= 1e-12) continue;  // differencing floor
      double slope = std::log2(series[s][l] / series[s][l + 1]);
      if (slope < min_slope) {
        min_slope = slope;
        worst = names[s];
      }
    }
  }
  out.pass = min_slope >= 1.7;
  out.detail = fmt("min order %.2f across seven series (tol 1.7), worst: ", min_slope);
  out.detail += worst;
  return out;
}

Line flat_background_source_vanishing(const LadderResult& lad) {
  if (lad.trajs.empty()) return {false, "no refinement trajectory available"};
  const Trajectory& tr = lad.trajs[0];
  const Snapshot& mid = tr.snaps[tr.snaps.size() / 2];
  PotentialState s;
  s.t = mid.t;
  s.f = mid.f;
  SplitMetric m = assemble_metric(lad.bg, s);
  TorsionSourceTerms ts = torsion_potential_source(lad.bg, m, mid.t);
  double worst = 0.0;
  for (const ScalarField* term :
       {&ts.ref_cross_minus, &ts.ref_cross_plus, &ts.bg_cross_plus, &ts.bg_grad_pp,
        &ts.bg_grad_pm, &ts.bg_cross_minus, &ts.bg_grad_mm, &ts.bg_grad_mp, &ts.total})
    worst = std::max(worst, sup_abs(*term));
  return {worst < 1e-12,
          fmt("eight terms and total: sup %.3g (tol 1e-12)", worst)};
}

struct LongRun {
  Background bg;
  Trajectory traj;
  bool ok = false;
};

Line maximum_principle_monitors(LongRun& lr) {
  RunConfig cfg;
  cfg.scenario = Scenario::GenericPotential;
  cfg.grid = GridSpec::reduced(64, 64);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 5.0;
  opt.ctl.sigma_cfl = 1.0;
  opt.snapshot_dt = 0.5;
  Trajectory tr = evolve(set.bg, set.s0, opt);
  if (!tr.completed) return {false, "t=5 run did not complete"};

  double d1 = max_rise(tr.monitors.sup_fdot);
  double d2 = max_fall(tr.monitors.inf_fdot);
  double d3 = max_rise(tr.monitors.sup_torsion_potential_sq);

  ScalarField u0 = ScalarField::sample(cfg.grid, [](double x1, double, double x3, double) {
    return std::sin(x1) + std::sin(x3);
  });
  HeatRun hr = coupled_heat(set.bg, tr, u0);

  lr.bg = set.bg;
  lr.traj = tr;
  lr.ok = true;
  bool ok = d1 <= 1e-8 && d2 <= 1e-8 && d3 <= 1e-8 && hr.max_sup_increase <= 1e-8;
  return {ok, fmt("worst per-step drift %.3g, heat-gradient rise %.3g (tol 1e-8)",
                  std::max(d1, std::max(d2, d3)), hr.max_sup_increase)};
}

Line apriori_constants_under_refinement(const LongRun& lr) {
  if (!lr.ok) return {false, "no coarse long run available"};
  RunConfig cfg;
  cfg.scenario = Scenario::GenericPotential;
  cfg.grid = GridSpec::reduced(128, 128);
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 5.0;
  opt.ctl.sigma_cfl = 1.0;
  opt.monitor_dt = 0.01;
  Trajectory tr = evolve(set.bg, set.s0, opt);
  if (!tr.completed) return {false, "refined run did not complete"};

  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-30});
  };
  double rf = rel(lr.traj.monitors.c_f, tr.monitors.c_f);
  double rfd = rel(lr.traj.monitors.c_fdot, tr.monitors.c_fdot);
  double rp = rel(lr.traj.monitors.c_phi, tr.monitors.c_phi);
  bool finite = std::isfinite(tr.monitors.c_f) && std::isfinite(tr.monitors.c_fdot) &&
                std::isfinite(tr.monitors.c_phi);
  double worst = std::max(rf, std::max(rfd, rp));
  return {finite && worst < 0.01,
          fmt("C_f %.4g, C_rate %.4g, C_phi %.4g; ", tr.monitors.c_f,
              tr.monitors.c_fdot, tr.monitors.c_phi) +
              fmt("worst shift %.3g (tol 0.01)", worst)};
}

Line constant_ratio_exact_solution() {
  RunConfig cfg;
  cfg.scenario = Scenario::Custom;
  cfg.grid = GridSpec::reduced(32, 32);
  cfg.hplus = "0.9";
  cfg.g0plus = "1";
  cfg.g0minus = "1";
  ScenarioSetup set = build_scenario(cfg);
  EvolveOptions opt;
  opt.t_end = 2.0;
  opt.ctl.sigma_cfl = 1.0;
  opt.monitor_dt = 0.01;
  Trajectory tr = evolve(set.bg, set.s0, opt);
  const double slope = std::log(1.0 / 0.9);
  double dev = sup_abs(offset(tr.snaps.back().f, -2.0 * slope));
  double cdev = std::abs(tr.monitors.c_fdot - slope);
  return {tr.completed && dev < 1e-10 && cdev < 1e-10,
          fmt("pointwise f error %.3g, rate-constant error %.3g (tol 1e-10)", dev, cdev)};
}

Line class_pairing_horizon_arithmetic() {
  bool ok = tau_star({1.0, 2.0, 0.2, -0.1}) == 5.0 &&
            tau_star({1.0, 1.0, 0.5, 0.25}) == 2.0 &&
            std::isinf(tau_star({1.0, 1.0, 0.0, 0.0}));
  return {ok, "tabulated horizons 5, 2, +inf reproduced exactly"};
}

Line normalized_flow_residual_envelope(const LadderResult& lad) {
  if (lad.trajs.size() < 4) return {false, "no refinement ladder available"};
  std::vector<double> rn;
  for (const Trajectory& tr : lad.trajs) {
    NormalizedTrajectory nt = normalize_trajectory(lad.bg, tr);
    rn.push_back(max_of(nt.residual.lhs_minus_rhs_sup));
  }
  // The residual is discretization error, so its decay must track the
  // envelope profile measured on the same ladder, anchored at the coarsest
  // level, with a 30% allowance per halving.
  bool ok = true;
  double worst = 0.0;
  for (std::size_t l = 1; l < rn.size(); ++l) {
    double bound = rn[0] * (lad.envelope[l] / lad.envelope[0]) * std::pow(1.3, double(l));
    worst = std::max(worst, rn[l] / bound);
    if (rn[l] > bound) ok = false;
  }
  return {ok, fmt("residual tracks the measured envelope: worst ratio %.3f (tol 1)", worst)};
}

}  // namespace

int main() {
  struct Row {
    const char* label;
    Line line;
    double seconds;
  };
  std::vector<Row> rows;
  auto timed = [&](const char* label, auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    Line ln;
    try {
      ln = fn();
    } catch (const std::exception& e) {
      ln = {false, std::string("exception: ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back({label, ln, sec});
    std::printf("[%s] %6.1fs  %-40s %s\n", ln.pass ? "PASS" : "FAIL", sec, label,
                ln.detail.c_str());
    std::fflush(stdout);
  };

  LadderResult ladder;
  LongRun longrun;

  timed("curvature identity agreement", curvature_identity_agreement);
  timed("flat fixed point", flat_fixed_point);
  timed("single-factor reduction oracle", single_factor_reduction_oracle);
  timed("evolution identity refinement", [&] {
    ladder = evolution_identity_refinement();
    return Line{ladder.pass, ladder.detail};
  });
  timed("flat-background source vanishing", [&] { return flat_background_source_vanishing(ladder); });
  timed("maximum-principle monitors", [&] { return maximum_principle_monitors(longrun); });
  timed("a priori constants under grid refinement",
        [&] { return apriori_constants_under_refinement(longrun); });
  timed("constant-ratio exact solution", constant_ratio_exact_solution);
  timed("class pairing horizon arithmetic", class_pairing_horizon_arithmetic);
  timed("normalized-flow residual envelope",
        [&] { return normalized_flow_residual_envelope(ladder); });

  int failed = 0;
  for (const Row& r : rows) failed += r.line.pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", int(rows.size()) - failed, rows.size());
  return failed == 0 ? 0 : 1;
}
