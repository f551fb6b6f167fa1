#include "gkflow/flow.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "gkflow/spectral.hpp"

namespace gkflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_time(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

double horizon_for(const ScalarField& g0, const ScalarField& p) {
  // Only genuinely positive values of P(h) shrink the background; spectral
  // noise on an identically zero form must not produce a fake horizon.
  const double thresh = 1e-13 * std::max(1.0, sup_abs(p));
  double hz = kInf;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.re[i] > thresh) hz = std::min(hz, g0.re[i] / p.re[i]);
  return hz;
}

ScalarField rhs_from_metric(const Background& bg, const SplitMetric& m,
                            double eps_pos) {
  return add(sub(log_field(m.gplus, eps_pos, "gplus"),
                 log_field(m.gminus, eps_pos, "gminus")),
             bg.log_h_ratio);
}

ScalarField rhs_at(const Background& bg, double t, const ScalarField& f,
                   double eps_pos) {
  PotentialState s;
  s.t = t;
  s.f = f;
  const SplitMetric m = assemble_metric(bg, s, eps_pos);
  return rhs_from_metric(bg, m, eps_pos);
}

ScalarField stage_rhs(const Background& bg, double t, const ScalarField& f,
                      double eps_pos, const char* stage) {
  try {
    return rhs_at(bg, t, f, eps_pos);
  } catch (const ConeViolation& e) {
    throw ConeViolation(std::string(e.what()) + " (" + stage + ")", e.min_value,
                        e.flat_index);
  }
}

ScalarField rk4_advance(const Background& bg, double t, const ScalarField& f,
                        const ScalarField& k1, double dt, double eps_pos) {
  const double th = t + 0.5 * dt;
  const ScalarField k2 = stage_rhs(bg, th, add(f, scale(k1, 0.5 * dt)), eps_pos,
                                   "stage 2");
  const ScalarField k3 = stage_rhs(bg, th, add(f, scale(k2, 0.5 * dt)), eps_pos,
                                   "stage 3");
  const ScalarField k4 = stage_rhs(bg, t + dt, add(f, scale(k3, dt)), eps_pos,
                                   "stage 4");
  const ScalarField incr = add(add(k1, k4), scale(add(k2, k3), 2.0));
  ScalarField out = add(f, scale(incr, dt / 6.0));
  require_finite(out, "potential after step");
  return out;
}

}  // namespace

void append_monitor_row(const Background& bg, const SplitMetric& m,
                        const ScalarField& f, const ScalarField& fdot, double t,
                        double mub_A, double eps_pos, MonitorSeries& ms) {
  const ScalarField trace_hg =
      add(div(m.gplus, bg.hplus, eps_pos), div(m.gminus, bg.hminus, eps_pos));
  const ScalarField trace_gh =
      add(div(bg.hplus, m.gplus, eps_pos), div(bg.hminus, m.gminus, eps_pos));
  const ScalarField f_zw = differentiate(f, DiffOp::DzDw);
  const ScalarField tpot = div(abs2(f_zw), mul(m.gplus, m.gminus), 0.0);
  const TorsionData td = torsion(m, eps_pos);
  const ScalarField phi = add(add(log_field(trace_hg, 0.0, "trace of g in h"),
                                  trace_gh),
                              scale(tpot, mub_A));
  const double pc = sup_abs(pluriclosed_residual_field(m));
  // Push only after every value exists: a throw above must not leave the
  // series ragged.
  ms.times.push_back(t);
  ms.sup_f.push_back(sup(f));
  ms.inf_f.push_back(inf(f));
  ms.sup_fdot.push_back(sup(fdot));
  ms.inf_fdot.push_back(inf(fdot));
  ms.sup_trace_hg.push_back(sup(trace_hg));
  ms.sup_trace_gh.push_back(sup(trace_gh));
  ms.sup_torsion_potential_sq.push_back(sup(tpot));
  ms.sup_T_sq.push_back(sup(td.norm_sq));
  ms.phi_mub.push_back(sup(phi));
  ms.min_gplus.push_back(inf(m.gplus));
  ms.min_gminus.push_back(inf(m.gminus));
  ms.pc_resid.push_back(pc);
}

void finalize_monitor_constants(MonitorSeries& ms) {
  for (std::size_t i = 0; i < ms.times.size(); ++i) {
    const double af = std::max(std::abs(ms.sup_f[i]), std::abs(ms.inf_f[i]));
    ms.c_f = std::max(ms.c_f, af / (1.0 + ms.times[i]));
    ms.c_fdot = std::max(ms.c_fdot, std::max(std::abs(ms.sup_fdot[i]),
                                             std::abs(ms.inf_fdot[i])));
    ms.c_phi = std::max(ms.c_phi, ms.phi_mub[i]);
  }
}

Background make_background(const SplitMetric& g0, const ScalarField& hplus,
                           const ScalarField& hminus, double eps_pos) {
  require_admissible(g0, eps_pos, "background g0");
  check_same_grid(g0.gplus, hplus, "background reference");
  check_same_grid(g0.gplus, hminus, "background reference");
  require_positive(hplus, eps_pos, "hplus");
  require_positive(hminus, eps_pos, "hminus");
  Background bg;
  bg.g0 = g0;
  bg.hplus = hplus;
  bg.hminus = hminus;
  bg.p_of_h = p_split(SplitMetric{hplus, hminus}, eps_pos);
  bg.log_h_ratio = sub(log_field(hminus, eps_pos, "hminus"),
                       log_field(hplus, eps_pos, "hplus"));
  bg.validity_horizon = std::min(horizon_for(g0.gplus, bg.p_of_h.p_plus),
                                 horizon_for(g0.gminus, bg.p_of_h.p_minus));
  return bg;
}

Background regauge(const Background& bg, const ScalarField& a, double tau,
                   double eps_pos) {
  if (!(tau > 0.0)) throw ConfigError("regauge tau must be positive");
  check_same_grid(bg.hplus, a, "regauge potential");
  if (!a.is_real()) throw ConfigError("regauge potential must be real");
  const ScalarField half = scale(a, 0.5 / tau);
  const ScalarField hp = mul(bg.hplus, exp_field(half));
  const ScalarField hm = mul(bg.hminus, exp_field(scale(half, -1.0)));
  return make_background(bg.g0, hp, hm, eps_pos);
}

SplitMetric background_metric(const Background& bg, double t) {
  if (!(t < bg.validity_horizon)) {
    std::ostringstream os;
    os << "background path evaluated at t = " << t
       << " at or beyond its validity horizon " << bg.validity_horizon;
    throw BackgroundExpired(os.str());
  }
  SplitMetric m;
  m.gplus = add(bg.g0.gplus, scale(bg.p_of_h.p_plus, -t));
  m.gminus = add(bg.g0.gminus, scale(bg.p_of_h.p_minus, -t));
  return m;
}

SplitMetric assemble_metric(const Background& bg, const PotentialState& s,
                            double eps_pos) {
  SplitMetric m = background_metric(bg, s.t);
  check_same_grid(m.gplus, s.f, "assemble_metric");
  if (!s.f.is_real()) throw ConfigError("potential must be a real field");
  m.gplus = add(m.gplus, differentiate(s.f, DiffOp::DzDzbar));
  m.gminus = sub(m.gminus, differentiate(s.f, DiffOp::DwDwbar));
  require_positive(m.gplus, eps_pos, "gplus");
  require_positive(m.gminus, eps_pos, "gminus");
  return m;
}

ScalarField rhs(const Background& bg, PotentialState& s, double eps_pos) {
  const SplitMetric m = assemble_metric(bg, s, eps_pos);
  ScalarField fdot = rhs_from_metric(bg, m, eps_pos);
  s.fdot_cache = fdot;
  return fdot;
}

double cfl_lambda_max(const SplitMetric& m, double eps_pos) {
  const GridSpec& g = m.gplus.spec;
  const double kPi = kTwoPi / 2.0;
  auto nyq_sq = [&](int axis) {
    const double k = kPi * double(g.n[axis]) / g.period[axis];
    return k * k;
  };
  double qz = 0.25 * nyq_sq(0);
  double qw = 0.25 * nyq_sq(2);
  if (g.mode == GridMode::Full4d) {
    qz += 0.25 * nyq_sq(1);
    qw += 0.25 * nyq_sq(3);
  }
  const ScalarField lam =
      add(div(ScalarField::constant(g, qz), m.gplus, eps_pos),
          div(ScalarField::constant(g, qw), m.gminus, eps_pos));
  return sup(lam);
}

double controller_dt(const Background& bg, const PotentialState& s,
                     const StepController& ctl) {
  if (ctl.fixed_dt > 0.0) return ctl.fixed_dt;
  if (!(ctl.sigma_cfl > 0.0)) throw ConfigError("sigma_cfl must be positive");
  const SplitMetric m = assemble_metric(bg, s, ctl.eps_pos);
  return ctl.sigma_cfl / cfl_lambda_max(m, ctl.eps_pos);
}

PotentialState step_dt(const Background& bg, const PotentialState& s, double dt,
                       double eps_pos) {
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  const ScalarField k1 = stage_rhs(bg, s.t, s.f, eps_pos, "stage 1");
  PotentialState out;
  out.t = s.t + dt;
  out.f = rk4_advance(bg, s.t, s.f, k1, dt, eps_pos);
  return out;
}

PotentialState step(const Background& bg, const PotentialState& s,
                    const StepController& ctl) {
  return step_dt(bg, s, controller_dt(bg, s, ctl), ctl.eps_pos);
}

Trajectory evolve(const Background& bg, const PotentialState& s0,
                  const EvolveOptions& opt) {
  if (!(opt.t_end > s0.t)) throw ConfigError("t_end must exceed the start time");
  if (!(opt.t_end < bg.validity_horizon))
    throw BackgroundExpired("t_end reaches past the background validity horizon");
  const double eps_pos = opt.ctl.eps_pos;
  const bool fixed = opt.ctl.fixed_dt > 0.0;
  const double span = opt.t_end - s0.t;

  long n_steps = 0;
  long mon_stride = 1;
  long snap_stride = 0;
  if (fixed) {
    const double dt = opt.ctl.fixed_dt;
    n_steps = std::llround(span / dt);
    if (n_steps < 1 || std::abs(double(n_steps) * dt - span) > 1e-9 * span)
      throw ConfigError("fixed_dt must divide the run length");
    {
      const SplitMetric m0 = assemble_metric(bg, s0, eps_pos);
      if (dt * cfl_lambda_max(m0, eps_pos) > 2.6)
        throw ConfigError("fixed_dt exceeds the explicit stability limit");
    }
    if (opt.snapshot_stride < 0) throw ConfigError("snapshot_stride must be >= 0");
    if (opt.monitor_dt > 0.0) mon_stride = std::max<long>(1, std::llround(opt.monitor_dt / dt));
    if (opt.snapshot_stride > 0)
      snap_stride = opt.snapshot_stride;
    else if (opt.snapshot_dt > 0.0)
      snap_stride = std::max<long>(1, std::llround(opt.snapshot_dt / dt));
  }

  Trajectory traj;
  PotentialState s = s0;
  double next_mon = opt.monitor_dt > 0.0 ? s0.t + opt.monitor_dt : 0.0;
  double next_snap = opt.snapshot_dt > 0.0 ? s0.t + opt.snapshot_dt : 0.0;
  long k = 0;

  try {
    while (true) {
      const SplitMetric m = assemble_metric(bg, s, eps_pos);
      const ScalarField fdot = rhs_from_metric(bg, m, eps_pos);
      s.fdot_cache = fdot;

      const bool last = fixed ? (k == n_steps) : near_time(s.t, opt.t_end);
      bool rec_mon, rec_snap;
      if (fixed) {
        rec_mon = last || (k % mon_stride == 0);
        rec_snap = last || k == 0 || (snap_stride > 0 && k % snap_stride == 0);
      } else {
        const bool mon_hit = opt.monitor_dt > 0.0 && near_time(s.t, next_mon);
        const bool snap_hit = opt.snapshot_dt > 0.0 && near_time(s.t, next_snap);
        rec_mon = last || k == 0 || opt.monitor_dt <= 0.0 || mon_hit;
        rec_snap = last || k == 0 || snap_hit;
        if (mon_hit) next_mon += opt.monitor_dt;
        if (snap_hit) next_snap += opt.snapshot_dt;
      }
      if (rec_mon)
        append_monitor_row(bg, m, s.f, fdot, s.t, opt.mub_A, eps_pos,
                           traj.monitors);
      if (rec_snap) traj.snaps.push_back({s.t, s.f, fdot});
      if (last) break;

      double dt_step;
      if (fixed) {
        dt_step = opt.ctl.fixed_dt;
      } else {
        dt_step = opt.ctl.sigma_cfl / cfl_lambda_max(m, eps_pos);
        double t_event = opt.t_end;
        if (opt.monitor_dt > 0.0) t_event = std::min(t_event, next_mon);
        if (opt.snapshot_dt > 0.0) t_event = std::min(t_event, next_snap);
        dt_step = std::min(dt_step, t_event - s.t);
      }

      ScalarField f_new = rk4_advance(bg, s.t, s.f, fdot, dt_step, eps_pos);
      ++k;
      double t_new = fixed ? s0.t + double(k) * opt.ctl.fixed_dt : s.t + dt_step;
      if (!fixed) {
        if (near_time(t_new, opt.t_end)) t_new = opt.t_end;
        if (opt.monitor_dt > 0.0 && near_time(t_new, next_mon)) t_new = next_mon;
        if (opt.snapshot_dt > 0.0 && near_time(t_new, next_snap)) t_new = next_snap;
      }
      s.t = t_new;
      s.f = std::move(f_new);
      s.fdot_cache.reset();
      if (k == 1) traj.dt_initial = dt_step;
      traj.dt_final = dt_step;
    }
    traj.completed = true;
  } catch (const ConeViolation& e) {
    traj.abort_kind = AbortKind::Cone;
    traj.abort_reason = e.what();
  } catch (const NonFiniteField& e) {
    traj.abort_kind = AbortKind::NonFinite;
    traj.abort_reason = e.what();
  } catch (const BackgroundExpired& e) {
    traj.abort_kind = AbortKind::Expired;
    traj.abort_reason = e.what();
  }
  traj.steps = k;
  finalize_monitor_constants(traj.monitors);
  return traj;
}

ClassData class_data(const SplitMetric& omega, const CurvatureForm& p) {
  check_same_grid(omega.gplus, p.p_plus, "class_data");
  const GridSpec& g = omega.gplus.spec;
  const double area_plus = g.period[0] * g.period[1];
  const double area_minus = g.period[2] * g.period[3];
  ClassData c;
  c.a_plus = mean(omega.gplus) * area_plus;
  c.a_minus = mean(omega.gminus) * area_minus;
  c.pi_plus = mean(p.p_plus) * area_plus;
  c.pi_minus = mean(p.p_minus) * area_minus;
  return c;
}

double tau_star(const ClassData& c) {
  if (!(c.a_plus > 0.0) || !(c.a_minus > 0.0))
    throw ConfigError("class areas must be positive");
  double ts = kInf;
  if (c.pi_plus > 0.0) ts = std::min(ts, c.a_plus / c.pi_plus);
  if (c.pi_minus > 0.0) ts = std::min(ts, c.a_minus / c.pi_minus);
  return ts;
}

NormalizedTrajectory normalize_trajectory(const Background& bg,
                                          const Trajectory& traj,
                                          double eps_pos) {
  if (traj.snaps.size() < 3)
    throw InsufficientSnapshots(
        "normalized-flow residual needs at least 3 snapshots");
  NormalizedTrajectory out;
  out.slices.reserve(traj.snaps.size());
  for (const Snapshot& sn : traj.snaps) {
    PotentialState st;
    st.t = sn.t;
    st.f = sn.f;
    const SplitMetric m = assemble_metric(bg, st, eps_pos);
    const double c = 1.0 / (1.0 + sn.t);
    NormalizedSlice sl;
    sl.s = std::log1p(sn.t);
    sl.ghat = SplitMetric{scale(m.gplus, c), scale(m.gminus, c)};
    out.slices.push_back(std::move(sl));
  }

  out.residual.name = "normalized-flow";
  out.residual.dt_used = traj.snaps[1].t - traj.snaps[0].t;
  for (std::size_t i = 1; i + 1 < out.slices.size(); ++i) {
    const double h0 = out.slices[i].s - out.slices[i - 1].s;
    const double h1 = out.slices[i + 1].s - out.slices[i].s;
    const double c0 = -h1 / (h0 * (h0 + h1));
    const double c1 = (h1 - h0) / (h0 * h1);
    const double c2 = h0 / (h1 * (h0 + h1));
    auto ds = [&](const ScalarField& a, const ScalarField& b,
                  const ScalarField& c_) {
      return add(add(scale(a, c0), scale(b, c1)), scale(c_, c2));
    };
    const SplitMetric& ghat = out.slices[i].ghat;
    const CurvatureForm p = p_split(ghat, eps_pos);
    const ScalarField rp = add(add(ds(out.slices[i - 1].ghat.gplus, ghat.gplus,
                                      out.slices[i + 1].ghat.gplus),
                                   p.p_plus),
                               ghat.gplus);
    const ScalarField rm = add(add(ds(out.slices[i - 1].ghat.gminus, ghat.gminus,
                                      out.slices[i + 1].ghat.gminus),
                                   p.p_minus),
                               ghat.gminus);
    out.residual.times.push_back(out.slices[i].s);
    out.residual.lhs_minus_rhs_sup.push_back(
        std::max(sup_abs(rp), sup_abs(rm)));
  }
  return out;
}

}  // namespace gkflow
