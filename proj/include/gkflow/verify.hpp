#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gkflow/flow.hpp"

namespace gkflow {

// Every residual check differences stored snapshots in time with the 3-point
// centered rule (nonuniform spacing handled) and evaluates the stated
// right-hand side spatially at the middle snapshot. When the coded dynamics
// matches the coded identity, residuals shrink at second order in the
// snapshot spacing; refinement studies are the acceptance mechanism.

// d/dt log(g±/h±) = Lap log(g±/h±) + |T|²/2 - tr_g rho(h±), one series per
// sign. Any positive reference pair may be supplied; the choice cancels in
// the continuum. The two-argument form uses the run's own h±.
std::array<ResidualSeries, 2> check_halfdet(const Background& bg,
                                            const Trajectory& traj,
                                            const SplitMetric& href,
                                            double eps_pos = kDefaultEpsPos);
std::array<ResidualSeries, 2> check_halfdet(const Background& bg,
                                            const Trajectory& traj,
                                            double eps_pos = kDefaultEpsPos);

// d/dt fdot = Lap fdot - p(h)+/g+ + p(h)-/g-.
ResidualSeries check_fdot(const Background& bg, const Trajectory& traj,
                          double eps_pos = kDefaultEpsPos);

// Source term of the mixed-derivative evolution, exported term by term so a
// failure localizes. The first two terms carry the reference metrics, the
// rest the time-dependent background path; all vanish identically over a
// flat background.
struct TorsionSourceTerms {
  ScalarField ref_cross_minus;  // + DzDw log h-
  ScalarField ref_cross_plus;   // - DzDw log h+
  ScalarField bg_cross_plus;    // + (1/g+) DzDw bg+
  ScalarField bg_grad_pp;       // - (Dz g+ / g+^2) Dw bg+
  ScalarField bg_grad_pm;       // - (Dz g- / (g+ g-)) Dw bg+
  ScalarField bg_cross_minus;   // - (1/g-) DzDw bg-
  ScalarField bg_grad_mm;       // + (Dw g- / g-^2) Dz bg-
  ScalarField bg_grad_mp;       // + (Dw g+ / (g+ g-)) Dz bg-
  ScalarField total;
};
TorsionSourceTerms torsion_potential_source(const Background& bg,
                                            const SplitMetric& m, double t,
                                            double eps_pos = kDefaultEpsPos);

// d/dt DzDw f = covariant Laplacian of DzDw f + source. The covariant
// Laplacian carries the connection corrections of both factors on the
// holomorphic legs.
ResidualSeries check_torsion_potential(const Background& bg,
                                       const Trajectory& traj,
                                       double eps_pos = kDefaultEpsPos);

struct NormEvolutionReport {
  ResidualSeries residual;
  // Largest positive jump of sup|beta|^2 between consecutive recorded rows
  // (monitor rows when present, else snapshots) and its verdict at the
  // given drift tolerance.
  double max_sup_increase = 0.0;
  bool monotone = false;
};

// Flat background only: d/dt |beta|^2 = Lap |beta|^2 - |conj-grad beta|^2
// - |grad beta|^2 - (q+/g+ + q-/g-) |beta|^2 with beta = DzDw f weighted by
// 1/(g+ g-), plus the maximum-principle corollary on sup|beta|^2.
NormEvolutionReport check_norm_evolution(const Background& bg,
                                         const Trajectory& traj,
                                         double drift_tol = 1e-8,
                                         double eps_pos = kDefaultEpsPos);

// Three series over a flat reference pair: evolution of h+/g+ (and mirror),
// evolution of g+/h+ (and mirror), and the gradient-product form of the
// latter special to one present direction per factor. Throws ConfigError
// when h± are not constant.
std::array<ResidualSeries, 3> check_trace_identities(const Background& bg,
                                                     const Trajectory& traj,
                                                     double eps_pos = kDefaultEpsPos);

// Pointwise disagreement of the two reaction forms for the g+/h+ evolution
// (the gradient-product form is a rewriting, not a new equation); sup over
// interior snapshots. Meaningful on real reduced-mode data.
double trace_form_disagreement(const Background& bg, const Trajectory& traj,
                               double eps_pos = kDefaultEpsPos);

struct HeatOptions {
  double sigma_cfl = 1.0;      // joint integration CFL fraction
  double fixed_dt = 0.0;       // overrides the CFL rule when > 0
  long residual_stride = 8;    // evaluate the identity every k-th step
  double eps_pos = kDefaultEpsPos;
};

struct HeatRun {
  std::vector<double> times;        // one row per step
  std::vector<double> sup_grad_sq;  // sup |dbar u|^2 per row
  double max_sup_increase = 0.0;    // largest positive jump of sup|dbar u|^2
  ResidualSeries identity_residual;
  double identity_sup = 0.0;        // max over the residual series
  // sup over samples of (d/dt - Lap)|dbar u|^2 + |conj-grad dbar u|^2; the
  // dimension-two inequality bounds it by the time-differencing error.
  double max_sign_violation = 0.0;
  double t_final = 0.0;
  ScalarField u_final;
};

// Integrates du/dt = Lap_{g(t)} u jointly with the potential flow restarted
// from the trajectory's first snapshot, monitoring sup|dbar u|^2 and the
// full evolution identity of |dbar u|^2.
HeatRun coupled_heat(const Background& bg, const Trajectory& traj,
                     const ScalarField& u0, const HeatOptions& opt = {});

// Rebuilds the monitor rows from the stored snapshots (resolution follows
// the snapshot cadence) and reports the smallest constants C with
// |f| <= C(1+t), |fdot| <= C and Phi <= C over the rows.
MonitorSeries monitor_estimates(const Background& bg, const Trajectory& traj,
                                double mub_A = 1.0,
                                double eps_pos = kDefaultEpsPos);

// Draws a strictly positive split pair of the admissible shape: a separable
// base plus a potential deformation applied with opposite signs, band
// limited so spectral derivatives are exact to roundoff.
SplitMetric random_admissible_metric(const GridSpec& spec, std::uint64_t seed);

struct CurvatureProbe {
  double rel_diff = 0.0;   // sup |p_split - p_direct| / max(1, sup|p_direct|)
  double mixed_sup = 0.0;  // sup of the mixed-slot curvature, zero in theory
};

// Compares the log-ratio curvature form against the direct coordinate
// expansion on one random admissible pair.
CurvatureProbe curvature_identity_probe(const GridSpec& spec,
                                        std::uint64_t seed,
                                        double eps_pos = kDefaultEpsPos);

}  // namespace gkflow
