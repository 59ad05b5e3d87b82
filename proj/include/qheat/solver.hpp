#pragma once

#include <optional>
#include <vector>

#include "qheat/barriers.hpp"
#include "qheat/diagnostics.hpp"
#include "qheat/field.hpp"
#include "qheat/initial_conditions.hpp"

namespace qheat {

enum class Scheme { SemiImplicitLagged, ExplicitCfl };
enum class BcMode { BarrierDirichlet, FrozenDirichlet };

struct BlowupThresholds {
  double v_max = std::numeric_limits<double>::infinity();
  double lip_max = std::numeric_limits<double>::infinity();
};

struct SolverConfig {
  double dy = 1.0 / 128.0;
  double dt_initial = 1e-3;
  double t_end = 0.5;
  Scheme scheme = Scheme::SemiImplicitLagged;
  int picard_iters = 2;  // lagged-coefficient solves per step, <= 10
  BcMode bc_mode = BcMode::BarrierDirichlet;
  double eps_viscosity = 0.0;
  BlowupThresholds blowup_thresholds;
  bool detect_blowup = false;
  int n_snapshots = 11;
  int diag_every = 1;
  bool allow_inadmissible = false;
  double accuracy_factor = 0.05;  // dt cap: factor / max local reaction rate
};

/// Precomputed per-grid step machinery: coefficient arrays of the transformed
/// evolution  dv/dt = (1/2) v vyy + (3 z''/2z') v vy + (z'''/z') v^2
/// and Dirichlet boundary values as functions of time.
struct StepContext {
  GridSpec grid;
  Field c_adv;  // 3 z'' / (2 z')
  Field c_rea;  // z''' / z'
  double eps = 0.0;
  Scheme scheme = Scheme::SemiImplicitLagged;
  int picard_iters = 2;
  std::function<double(double)> bc_left, bc_right;  // v at y_min / y_max at time t
};

StepContext make_step_context(const Transform& T, const GridSpec& grid, const SolverConfig& cfg,
                              std::function<double(double)> bc_left,
                              std::function<double(double)> bc_right);

struct StepResult {
  FieldPair field;
  bool ok = true;
  bool noncontraction = false;  // Picard iterate change grew; caller should halve dt
  double clamp_mass = 0.0;      // total negative mass removed by the floor at 0
};

/// One time step. Semi-implicit: tridiagonal solve with diffusion coefficient
/// (v + eps)/2 frozen at the lagged iterate, advection and reaction explicit,
/// optional Picard re-lagging. Explicit: forward Euler (caller enforces the
/// CFL rule dt <= 0.4 dy^2 / max(v + eps)).
StepResult step(const FieldPair& f, const StepContext& ctx, double dt);

/// Convenience overload building a frozen-boundary context on the fly.
StepResult step(const FieldPair& f, const Transform& T, const SolverConfig& cfg, double dt);

enum class SolveStatus { Completed, BlowupDetected, StepFailure };

struct BlowupDetection {
  double t_cross = 0.0;     // first threshold crossing
  double t_star = 0.0;      // extrapolated divergence time
  std::string quantity;     // which scalar crossed
  double threshold = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Completed;
  double t_stop = 0.0;
  std::optional<BlowupDetection> detection;
  std::vector<FieldPair> trajectory;            // snapshots at the requested times
  std::vector<DiagnosticsReport> diagnostics;   // every diag_every accepted steps
  BarrierPair barriers;
  double K_used = 1.0;
  double q_running = 0.0;      // running max of the quadratic-ratio functional
  double v_sup_seen = 0.0;
  double clamp_worst = 0.0;    // max per-step clamp mass relative to field scale
  long steps_taken = 0;
};

/// Integrate the transformed evolution with barrier or frozen Dirichlet data.
/// bc_override, when given, replaces the case supersolution as the boundary
/// data source (it must bracket the boundary trace, as any sandwich datum may).
SolveResult solve(const InitialCondition& u0, const DomainCase& c, const Transform& T,
                  const SolverConfig& cfg, const Barrier* bc_override = nullptr);

/// Least-squares fit of m(t) ~ c / (T - t) on (t, m) samples via linear
/// regression of 1/m on t; returns T, or nothing if the fit is not divergent.
std::optional<double> fit_inverse_divergence(const std::vector<std::pair<double, double>>& tm);

/// First crossing of any armed threshold in the report series, with the
/// divergence time extrapolated from the samples leading up to the crossing.
std::optional<BlowupDetection> detect_blowup(const std::vector<DiagnosticsReport>& series,
                                             const BlowupThresholds& thr);

}  // namespace qheat
