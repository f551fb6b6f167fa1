#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gkflow/geometry.hpp"

namespace gkflow {

// Fixed data of a run: initial metric, reference metrics, their curvature
// form, and the horizon up to which the linear background path stays
// positive pointwise.
struct Background {
  SplitMetric g0;
  ScalarField hplus;
  ScalarField hminus;
  CurvatureForm p_of_h;
  ScalarField log_h_ratio;  // log(hminus) - log(hplus), cached for the rhs
  double validity_horizon = 0.0;  // +inf when P(h) has no positive part
};

Background make_background(const SplitMetric& g0, const ScalarField& hplus,
                           const ScalarField& hminus,
                           double eps_pos = kDefaultEpsPos);

// Gauge transform of the reference metrics: h± -> e^{±a/(2 tau)} h±.
Background regauge(const Background& bg, const ScalarField& a, double tau,
                   double eps_pos = kDefaultEpsPos);

struct PotentialState {
  double t = 0.0;
  ScalarField f;
  std::optional<ScalarField> fdot_cache;
};

// Background path at time t: (g0plus - t p_plus(h), g0minus - t p_minus(h)).
// Throws BackgroundExpired at or past the horizon.
SplitMetric background_metric(const Background& bg, double t);

// Potential ansatz: gplus = bgplus(t) + dzdzb f, gminus = bgminus(t) - dwdwb f.
SplitMetric assemble_metric(const Background& bg, const PotentialState& s,
                            double eps_pos = kDefaultEpsPos);

// Flow right-hand side log(gplus hminus / (hplus gminus)); caches into
// s.fdot_cache.
ScalarField rhs(const Background& bg, PotentialState& s,
                double eps_pos = kDefaultEpsPos);

struct StepController {
  double sigma_cfl = 0.25;
  double eps_pos = kDefaultEpsPos;
  // When > 0 the step size is constant (refinement studies); otherwise the
  // parabolic CFL rule dt = sigma / lambda_max is used.
  double fixed_dt = 0.0;
};

// Largest symbol of the linearized operator on the current metric; the CFL
// rule divides sigma by this.
double cfl_lambda_max(const SplitMetric& m, double eps_pos = kDefaultEpsPos);

double controller_dt(const Background& bg, const PotentialState& s,
                     const StepController& ctl);

// One classical 4-stage Runge-Kutta step of size dt; every stage re-checks
// the positive cone.
PotentialState step_dt(const Background& bg, const PotentialState& s, double dt,
                       double eps_pos = kDefaultEpsPos);

PotentialState step(const Background& bg, const PotentialState& s,
                    const StepController& ctl);

struct Snapshot {
  double t = 0.0;
  ScalarField f;
  ScalarField fdot;
};

struct MonitorSeries {
  std::vector<double> times;
  std::vector<double> sup_f, inf_f;
  std::vector<double> sup_fdot, inf_fdot;
  std::vector<double> sup_trace_hg, sup_trace_gh;
  std::vector<double> sup_torsion_potential_sq;
  std::vector<double> sup_T_sq;
  std::vector<double> phi_mub;
  std::vector<double> min_gplus, min_gminus;
  std::vector<double> pc_resid;
  // Smallest constants making |f| <= C (1 + t), |fdot| <= C and Phi <= C
  // hold over the recorded rows.
  double c_f = 0.0;
  double c_fdot = 0.0;
  double c_phi = 0.0;
};

// Appends one row of sup/inf diagnostics for the given state; used by the
// evolution loop and by offline re-derivation from snapshots.
void append_monitor_row(const Background& bg, const SplitMetric& m,
                        const ScalarField& f, const ScalarField& fdot, double t,
                        double mub_A, double eps_pos, MonitorSeries& ms);
// Fills c_f, c_fdot, c_phi from the recorded rows.
void finalize_monitor_constants(MonitorSeries& ms);

enum class AbortKind { None, Cone, NonFinite, Expired };

struct Trajectory {
  std::vector<Snapshot> snaps;
  MonitorSeries monitors;
  double dt_initial = 0.0;
  double dt_final = 0.0;
  long steps = 0;
  bool completed = false;
  AbortKind abort_kind = AbortKind::None;
  std::string abort_reason;
};

struct EvolveOptions {
  double t_end = 1.0;
  StepController ctl;
  // Time-based cadences; 0 disables the time rule. monitor_dt == 0 records
  // monitors at every step. snapshot_dt == 0 keeps only the endpoint states
  // unless snapshot_stride is set.
  double snapshot_dt = 0.0;
  double monitor_dt = 0.0;
  // Fixed-dt mode only: snapshot every k steps, giving exactly uniform
  // snapshot spacing for time differencing.
  int snapshot_stride = 0;
  double mub_A = 1.0;
};

Trajectory evolve(const Background& bg, const PotentialState& s0,
                  const EvolveOptions& opt);

// ---- class data and tau* ----

struct ClassData {
  double a_plus = 0.0;
  double a_minus = 0.0;
  double pi_plus = 0.0;
  double pi_minus = 0.0;
};

// Pairings of the metric form and a curvature form with the two factors:
// grid mean times factor area.
ClassData class_data(const SplitMetric& omega, const CurvatureForm& p);

// Largest time with a - t pi positive on both factors; +inf when neither pi
// is positive. Throws ConfigError on non-positive areas.
double tau_star(const ClassData& c);

// ---- normalized flow ----

struct ResidualSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> lhs_minus_rhs_sup;
  double dt_used = 0.0;
};

struct NormalizedSlice {
  double s = 0.0;
  SplitMetric ghat;
};

struct NormalizedTrajectory {
  std::vector<NormalizedSlice> slices;
  // Sup residual of d_s ghat + P(ghat) + ghat at interior slices.
  ResidualSeries residual;
};

// Change of variables s = log(1 + t), ghat = g / (1 + t), with the
// normalized-equation residual evaluated by nonuniform centered time
// differences. Throws InsufficientSnapshots with fewer than 3 snapshots.
NormalizedTrajectory normalize_trajectory(const Background& bg,
                                          const Trajectory& traj,
                                          double eps_pos = kDefaultEpsPos);

}  // namespace gkflow
