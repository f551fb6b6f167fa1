#include "gkflow/runner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gkflow/scenario.hpp"
#include "gkflow/snapshot.hpp"

namespace gkflow {

namespace {

constexpr double kCurvRelTol = 1e-9;
constexpr double kCurvMixedTol = 1e-10;
constexpr double kDriftTol = 1e-8;
constexpr double kSlopeMin = 1.7;
constexpr int kCurvDraws = 20;
constexpr int kVerifyLevels = 4;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string g3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << content;
  if (!out) throw ConfigError("failed writing output file: " + path);
}

std::string sanitize(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      c = '_';
  }
  return s;
}

struct Emitter {
  std::string dir;
  std::vector<std::string>* files = nullptr;

  std::string path_of(const std::string& name) const { return dir + "/" + name; }

  void text(const std::string& name, const std::string& content) const {
    write_text_file(path_of(name), content);
    files->push_back(name);
  }

  void field(const std::string& name, const ScalarField& f) const {
    write_snapshot(path_of(name), f);
    files->push_back(name);
  }

  void series(const std::string& name, const ResidualSeries& rs) const {
    std::ostringstream os;
    os << "time,lhs_minus_rhs_sup\n";
    for (std::size_t i = 0; i < rs.times.size(); ++i) {
      os << g17(rs.times[i]) << "," << g17(rs.lhs_minus_rhs_sup[i]) << "\n";
    }
    text(name, os.str());
  }

  void monitors(const std::string& name, const MonitorSeries& ms) const {
    std::ostringstream os;
    os << "time,sup_f,inf_f,sup_fdot,inf_fdot,sup_trace_hg,sup_trace_gh,"
          "sup_torsion_potential_sq,sup_T_sq,phi_mub,min_gplus,min_gminus,"
          "pc_resid\n";
    for (std::size_t i = 0; i < ms.times.size(); ++i) {
      os << g17(ms.times[i]) << "," << g17(ms.sup_f[i]) << ","
         << g17(ms.inf_f[i]) << "," << g17(ms.sup_fdot[i]) << ","
         << g17(ms.inf_fdot[i]) << "," << g17(ms.sup_trace_hg[i]) << ","
         << g17(ms.sup_trace_gh[i]) << ","
         << g17(ms.sup_torsion_potential_sq[i]) << "," << g17(ms.sup_T_sq[i])
         << "," << g17(ms.phi_mub[i]) << "," << g17(ms.min_gplus[i]) << ","
         << g17(ms.min_gminus[i]) << "," << g17(ms.pc_resid[i]) << "\n";
    }
    text(name, os.str());
  }
};

double series_max(const ResidualSeries& rs) {
  double m = 0.0;
  for (double v : rs.lhs_minus_rhs_sup) m = std::max(m, std::abs(v));
  return m;
}

bool field_nearly_constant(const ScalarField& f) {
  if (!f.is_real()) return false;
  const double m = mean(f);
  return sup_abs(offset(f, -m)) <= 1e-12 * std::max(1.0, std::abs(m));
}

bool reference_constant(const Background& bg) {
  return field_nearly_constant(bg.hplus) && field_nearly_constant(bg.hminus);
}

bool background_flat(const Background& bg) {
  return reference_constant(bg) && field_nearly_constant(bg.g0.gplus) &&
         field_nearly_constant(bg.g0.gminus) &&
         sup_abs(bg.p_of_h.p_plus) <= 1e-10 &&
         sup_abs(bg.p_of_h.p_minus) <= 1e-10;
}

// "all" expands to every applicable check; explicitly named checks are kept
// even when inapplicable so the mismatch surfaces as an error.
struct CheckPlan {
  std::vector<std::string> names;
  bool expanded_from_all = false;
};

CheckPlan plan_checks(const RunConfig& cfg) {
  CheckPlan plan;
  for (const std::string& c : cfg.checks) {
    if (c == "all") {
      plan.expanded_from_all = true;
      for (const std::string& k : known_check_names()) {
        if (k != "all") plan.names.push_back(k);
      }
    } else {
      plan.names.push_back(c);
    }
  }
  std::sort(plan.names.begin(), plan.names.end());
  plan.names.erase(std::unique(plan.names.begin(), plan.names.end()),
                   plan.names.end());
  return plan;
}

CheckVerdict curvature_check(const RunConfig& cfg) {
  double worst_rel = 0.0;
  double worst_mixed = 0.0;
  const std::uint64_t base = static_cast<std::uint64_t>(cfg.seed);
  for (int i = 0; i < kCurvDraws; ++i) {
    const CurvatureProbe p =
        curvature_identity_probe(cfg.grid, base + static_cast<std::uint64_t>(i),
                                 cfg.eps_pos);
    worst_rel = std::max(worst_rel, p.rel_diff);
    worst_mixed = std::max(worst_mixed, p.mixed_sup);
  }
  CheckVerdict v;
  v.name = "curvature-identity";
  v.pass = worst_rel < kCurvRelTol && worst_mixed < kCurvMixedTol;
  v.detail = std::to_string(kCurvDraws) +
             " random admissible pairs: max rel diff " + g3(worst_rel) +
             " (tol " + g3(kCurvRelTol) + "), max mixed slot " +
             g3(worst_mixed) + " (tol " + g3(kCurvMixedTol) + ")";
  return v;
}

std::string residual_note(double worst, double dt) {
  return "sup residual " + g3(worst) + " at snapshot spacing " + g3(dt) +
         "; order is judged by the verify command";
}

}  // namespace

std::string RunReport::text() const {
  std::ostringstream os;
  os << "pluriclosed potential-flow report\n";
  os << "completed: " << (completed ? "yes" : "no") << "\n";
  if (!abort_reason.empty()) os << "abort: " << abort_reason << "\n";
  os << "t_final: " << g17(t_final) << "\n";
  os << "c_f: " << g17(c_f) << "\n";
  os << "c_fdot: " << g17(c_fdot) << "\n";
  os << "c_phi: " << g17(c_phi) << "\n";
  for (const CheckVerdict& c : checks) {
    os << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": " << c.detail
       << "\n";
  }
  if (!files.empty()) {
    os << "files:\n";
    for (const std::string& f : files) os << "  " << f << "\n";
  }
  os << "overall: " << (all_pass ? "pass" : "FAIL") << "\n";
  return os.str();
}

std::string resolve_out_dir(const std::string& requested) {
  std::string dir = requested;
  if (dir.empty()) {
    if (const char* env = std::getenv("GKFLOW_OUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
  return dir;
}

RunReport run_scenario(const RunConfig& cfg, const std::string& out_dir) {
  validate_config(cfg);
  const ScenarioSetup setup = build_scenario(cfg);
  const CheckPlan plan = plan_checks(cfg);

  auto wants = [&plan](const char* name) {
    return std::find(plan.names.begin(), plan.names.end(), name) !=
           plan.names.end();
  };
  const bool wants_residuals = wants("log-det-ratio") ||
                               wants("potential-rate") ||
                               wants("torsion-potential") ||
                               wants("torsion-potential-norm") ||
                               wants("trace");

  EvolveOptions opt;
  opt.t_end = cfg.t_end;
  opt.ctl.sigma_cfl = cfg.sigma_cfl;
  opt.ctl.eps_pos = cfg.eps_pos;
  opt.snapshot_dt = cfg.snapshot_dt;
  opt.monitor_dt = cfg.monitor_dt;
  opt.mub_A = cfg.mub_A;
  std::string cadence_note;
  if (wants_residuals && opt.snapshot_dt <= 0.0) {
    opt.snapshot_dt = cfg.t_end / 64.0;
    cadence_note = "snapshot_dt defaulted to t_end/64 for residual checks";
  }

  const Trajectory traj = evolve(setup.bg, setup.s0, opt);

  RunReport rep;
  rep.config_echo = serialize_config(cfg);
  rep.completed = traj.completed;
  rep.abort_reason = traj.abort_reason;
  rep.c_f = traj.monitors.c_f;
  rep.c_fdot = traj.monitors.c_fdot;
  rep.c_phi = traj.monitors.c_phi;
  if (!traj.snaps.empty()) rep.t_final = traj.snaps.back().t;

  const Emitter em{out_dir, &rep.files};
  em.text("config.txt", rep.config_echo);
  em.monitors("monitors.csv", traj.monitors);
  if (!traj.snaps.empty()) {
    const Snapshot& first = traj.snaps.front();
    const Snapshot& last = traj.snaps.back();
    PotentialState si{first.t, first.f, std::nullopt};
    PotentialState sf{last.t, last.f, std::nullopt};
    const SplitMetric mi = assemble_metric(setup.bg, si, cfg.eps_pos);
    const SplitMetric mf = assemble_metric(setup.bg, sf, cfg.eps_pos);
    em.field("initial_f.gkf1", first.f);
    em.field("initial_fdot.gkf1", first.fdot);
    em.field("initial_gplus.gkf1", mi.gplus);
    em.field("initial_gminus.gkf1", mi.gminus);
    em.field("final_f.gkf1", last.f);
    em.field("final_fdot.gkf1", last.fdot);
    em.field("final_gplus.gkf1", mf.gplus);
    em.field("final_gminus.gkf1", mf.gminus);
  }

  if (!cadence_note.empty()) {
    rep.checks.push_back({"cadence", true, cadence_note});
  }

  if (traj.completed) {
    auto guard = [&](const char* name, auto&& body) {
      try {
        body();
      } catch (const ConfigError& e) {
        // Applicability errors are tolerated only for checks pulled in by
        // "all"; a check the user named must be runnable.
        if (!plan.expanded_from_all) throw;
        rep.checks.push_back(
            {name, true, std::string("not applicable: ") + e.what()});
      }
    };

    for (const std::string& name : plan.names) {
      if (name == "curvature-identity") {
        rep.checks.push_back(curvature_check(cfg));
      } else if (name == "log-det-ratio") {
        guard(name.c_str(), [&] {
          const auto pair = check_halfdet(setup.bg, traj, cfg.eps_pos);
          double worst = 0.0;
          for (const ResidualSeries& rs : pair) {
            em.series("series_" + sanitize(rs.name) + ".csv", rs);
            worst = std::max(worst, series_max(rs));
          }
          rep.checks.push_back(
              {name, std::isfinite(worst),
               residual_note(worst, pair[0].dt_used)});
        });
      } else if (name == "potential-rate") {
        guard(name.c_str(), [&] {
          const ResidualSeries rs = check_fdot(setup.bg, traj, cfg.eps_pos);
          em.series("series_" + sanitize(rs.name) + ".csv", rs);
          rep.checks.push_back({name, std::isfinite(series_max(rs)),
                                residual_note(series_max(rs), rs.dt_used)});
        });
      } else if (name == "torsion-potential") {
        guard(name.c_str(), [&] {
          const ResidualSeries rs =
              check_torsion_potential(setup.bg, traj, cfg.eps_pos);
          em.series("series_" + sanitize(rs.name) + ".csv", rs);
          rep.checks.push_back({name, std::isfinite(series_max(rs)),
                                residual_note(series_max(rs), rs.dt_used)});
        });
      } else if (name == "torsion-potential-norm") {
        guard(name.c_str(), [&] {
          const NormEvolutionReport nr =
              check_norm_evolution(setup.bg, traj, kDriftTol, cfg.eps_pos);
          em.series("series_" + sanitize(nr.residual.name) + ".csv",
                    nr.residual);
          rep.checks.push_back(
              {name, nr.monotone && std::isfinite(series_max(nr.residual)),
               "max sup increase " + g3(nr.max_sup_increase) + " (tol " +
                   g3(kDriftTol) + "); " +
                   residual_note(series_max(nr.residual),
                                 nr.residual.dt_used)});
        });
      } else if (name == "trace") {
        guard(name.c_str(), [&] {
          const auto trio = check_trace_identities(setup.bg, traj, cfg.eps_pos);
          double worst = 0.0;
          for (const ResidualSeries& rs : trio) {
            em.series("series_" + sanitize(rs.name) + ".csv", rs);
            worst = std::max(worst, series_max(rs));
          }
          const double dis = trace_form_disagreement(setup.bg, traj, cfg.eps_pos);
          rep.checks.push_back(
              {name, dis < 1e-9 && std::isfinite(worst),
               "reaction-form disagreement " + g3(dis) + " (tol 1e-09); " +
                   residual_note(worst, trio[0].dt_used)});
        });
      } else if (name == "heat-gradient") {
        guard(name.c_str(), [&] {
          const ScalarField u0 =
              resolve_potential_spec("sin(x1)+sin(x3)", cfg.grid);
          HeatOptions hopt;
          hopt.eps_pos = cfg.eps_pos;
          const HeatRun hr = coupled_heat(setup.bg, traj, u0, hopt);
          em.series("series_heat-identity.csv", hr.identity_residual);
          rep.checks.push_back(
              {name, hr.max_sup_increase <= kDriftTol,
               "max sup increase of |dbar u|^2 " + g3(hr.max_sup_increase) +
                   " (tol " + g3(kDriftTol) + "), identity sup " +
                   g3(hr.identity_sup) + ", sign monitor " +
                   g3(hr.max_sign_violation)});
        });
      } else if (name == "monitors") {
        double phi_rise = 0.0;
        const auto& pm = traj.monitors.phi_mub;
        for (std::size_t i = 1; i < pm.size(); ++i) {
          phi_rise = std::max(phi_rise, pm[i] - pm[i - 1]);
        }
        const bool constants_ok = std::isfinite(rep.c_f) &&
                                  std::isfinite(rep.c_fdot) &&
                                  std::isfinite(rep.c_phi);
        bool pass = constants_ok;
        std::string detail = "c_f " + g3(rep.c_f) + ", c_fdot " +
                             g3(rep.c_fdot) + ", c_phi " + g3(rep.c_phi) +
                             ", max phi increase " + g3(phi_rise);
        if (background_flat(setup.bg)) {
          pass = pass && phi_rise <= kDriftTol;
          detail += " (tol " + g3(kDriftTol) + ", flat reference)";
        } else {
          detail += " (reported only; reference is not flat)";
        }
        rep.checks.push_back({name, pass, detail});
      }
    }
  }

  rep.all_pass = traj.completed;
  for (const CheckVerdict& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
  if (!traj.completed) {
    rep.exit_code = traj.abort_kind == AbortKind::Cone ? 3 : 2;
  } else {
    rep.exit_code = rep.all_pass ? 0 : 2;
  }
  em.text("report.txt", rep.text());
  return rep;
}

RunReport verify_scenario(const RunConfig& cfg, const std::string& out_dir) {
  validate_config(cfg);
  const ScenarioSetup setup = build_scenario(cfg);
  const CheckPlan plan = plan_checks(cfg);

  // Coarsest level: enough fixed steps to sit safely inside the stability
  // region, rounded so one snapshot stride covers all levels.
  const SplitMetric m0 = assemble_metric(setup.bg, setup.s0, cfg.eps_pos);
  const double lam = cfl_lambda_max(m0, cfg.eps_pos);
  const long n_min =
      static_cast<long>(std::ceil(cfg.t_end * lam / 0.9)) + 1;
  const long n0 = 64 * ((n_min + 63) / 64);
  const int stride = static_cast<int>(n0 / 64);

  RunReport rep;
  rep.config_echo = serialize_config(cfg);
  const Emitter em{out_dir, &rep.files};
  em.text("config.txt", rep.config_echo);

  bool norm_applicable = true;
  bool trace_applicable = true;
  std::string norm_reason, trace_reason;

  // name -> per-level max residual
  std::map<std::string, std::array<double, kVerifyLevels>> table;
  std::vector<std::string> order;
  auto record = [&](const ResidualSeries& rs, int level) {
    auto it = table.find(rs.name);
    if (it == table.end()) {
      it = table.emplace(rs.name, std::array<double, kVerifyLevels>{}).first;
      order.push_back(rs.name);
    }
    it->second[static_cast<std::size_t>(level)] = series_max(rs);
    em.series("verify_" + sanitize(rs.name) + "_level" +
                  std::to_string(level) + ".csv",
              rs);
  };

  double t_final = 0.0;
  for (int level = 0; level < kVerifyLevels; ++level) {
    const long n = n0 << level;
    EvolveOptions opt;
    opt.t_end = cfg.t_end;
    opt.ctl.eps_pos = cfg.eps_pos;
    opt.ctl.fixed_dt = cfg.t_end / static_cast<double>(n);
    opt.snapshot_stride = stride;
    opt.monitor_dt = cfg.t_end / 64.0;
    opt.mub_A = cfg.mub_A;

    const Trajectory traj = evolve(setup.bg, setup.s0, opt);
    if (!traj.completed) {
      rep.completed = false;
      rep.abort_reason = traj.abort_reason;
      rep.exit_code = traj.abort_kind == AbortKind::Cone ? 3 : 2;
      rep.all_pass = false;
      em.text("report.txt", rep.text());
      return rep;
    }
    t_final = traj.snaps.back().t;
    if (level == 0) {
      rep.c_f = traj.monitors.c_f;
      rep.c_fdot = traj.monitors.c_fdot;
      rep.c_phi = traj.monitors.c_phi;
    }

    for (const ResidualSeries& rs : check_halfdet(setup.bg, traj, cfg.eps_pos))
      record(rs, level);
    record(check_fdot(setup.bg, traj, cfg.eps_pos), level);
    record(check_torsion_potential(setup.bg, traj, cfg.eps_pos), level);
    if (norm_applicable) {
      try {
        record(check_norm_evolution(setup.bg, traj, kDriftTol, cfg.eps_pos)
                   .residual,
               level);
      } catch (const ConfigError& e) {
        norm_applicable = false;
        norm_reason = e.what();
      }
    }
    if (trace_applicable) {
      try {
        for (const ResidualSeries& rs :
             check_trace_identities(setup.bg, traj, cfg.eps_pos))
          record(rs, level);
      } catch (const ConfigError& e) {
        trace_applicable = false;
        trace_reason = e.what();
      }
    }
    record(normalize_trajectory(setup.bg, traj, cfg.eps_pos).residual, level);
  }

  rep.completed = true;
  rep.t_final = t_final;

  bool all_series_pass = true;
  for (const std::string& name : order) {
    const auto& r = table[name];
    double min_slope = std::numeric_limits<double>::infinity();
    std::string slopes;
    for (int l = 0; l + 1 < kVerifyLevels; ++l) {
      double s;
      if (r[l + 1] <= 0.0) {
        s = std::numeric_limits<double>::infinity();
      } else {
        s = std::log2(r[l] / r[l + 1]);
      }
      min_slope = std::min(min_slope, s);
      if (l) slopes += ", ";
      slopes += g3(s);
    }
    CheckVerdict v;
    v.name = name;
    v.pass = std::isfinite(r[0]) && min_slope >= kSlopeMin;
    v.detail = "residuals " + g3(r[0]) + " -> " + g3(r[kVerifyLevels - 1]) +
               ", slopes [" + slopes + "], min " + g3(min_slope) + " (need " +
               g3(kSlopeMin) + ")";
    all_series_pass = all_series_pass && v.pass;
    rep.checks.push_back(v);
  }
  if (!norm_applicable) {
    rep.checks.push_back({"torsion-potential-norm", true,
                          "not applicable: " + norm_reason});
  }
  if (!trace_applicable) {
    rep.checks.push_back({"trace", true, "not applicable: " + trace_reason});
  }

  const bool wants_curvature =
      plan.names.empty() ||
      std::find(plan.names.begin(), plan.names.end(), "curvature-identity") !=
          plan.names.end();
  if (wants_curvature) {
    rep.checks.push_back(curvature_check(cfg));
    all_series_pass = all_series_pass && rep.checks.back().pass;
  }

  rep.all_pass = all_series_pass;
  rep.exit_code = rep.all_pass ? 0 : 2;
  em.text("report.txt", rep.text());
  return rep;
}

RunReport heat_scenario(const RunConfig& cfg, const std::string& u0_spec,
                        const std::string& out_dir) {
  validate_config(cfg);
  const ScenarioSetup setup = build_scenario(cfg);

  EvolveOptions opt;
  opt.t_end = cfg.t_end;
  opt.ctl.sigma_cfl = cfg.sigma_cfl;
  opt.ctl.eps_pos = cfg.eps_pos;
  opt.mub_A = cfg.mub_A;
  const Trajectory traj = evolve(setup.bg, setup.s0, opt);

  RunReport rep;
  rep.config_echo = serialize_config(cfg);
  rep.completed = traj.completed;
  rep.abort_reason = traj.abort_reason;
  const Emitter em{out_dir, &rep.files};
  em.text("config.txt", rep.config_echo);

  if (!traj.completed) {
    rep.all_pass = false;
    rep.exit_code = traj.abort_kind == AbortKind::Cone ? 3 : 2;
    em.text("report.txt", rep.text());
    return rep;
  }

  const std::string spec = u0_spec.empty() ? "sin(x1)+sin(x3)" : u0_spec;
  const ScalarField u0 = resolve_potential_spec(spec, cfg.grid);
  HeatOptions hopt;
  hopt.sigma_cfl = cfg.sigma_cfl;
  hopt.eps_pos = cfg.eps_pos;
  const HeatRun hr = coupled_heat(setup.bg, traj, u0, hopt);

  rep.t_final = hr.t_final;
  {
    std::ostringstream os;
    os << "time,sup_grad_sq\n";
    for (std::size_t i = 0; i < hr.times.size(); ++i) {
      os << g17(hr.times[i]) << "," << g17(hr.sup_grad_sq[i]) << "\n";
    }
    em.text("heat_monitor.csv", os.str());
  }
  em.series("heat_identity.csv", hr.identity_residual);
  em.field("heat_u_final.gkf1", hr.u_final);

  CheckVerdict v;
  v.name = "heat-gradient";
  v.pass = hr.max_sup_increase <= kDriftTol;
  v.detail = "max sup increase of |dbar u|^2 " + g3(hr.max_sup_increase) +
             " (tol " + g3(kDriftTol) + "), identity sup " +
             g3(hr.identity_sup) + ", sign monitor " +
             g3(hr.max_sign_violation);
  rep.checks.push_back(v);

  rep.all_pass = v.pass;
  rep.exit_code = rep.all_pass ? 0 : 2;
  em.text("report.txt", rep.text());
  return rep;
}

}  // namespace gkflow
