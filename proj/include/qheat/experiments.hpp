#pragma once

#include <vector>

#include "qheat/solver.hpp"
#include "qheat/theta_construction.hpp"

namespace qheat {

/// Early-blow-up run: data kappa x^2 + x^2 theta(log x) on the half-line,
/// integrated with divergence detection armed across a threshold ladder,
/// with the weighted-mass functional J and the exponential-moment envelope
/// monitored along the way.
struct BlowupExperimentConfig {
  double kappa = 1.0;
  double lambda = 0.1;
  double target_b = 2.772588722239781;  // log 16
  double dy = 1.0 / 128.0;
  double y_max = 6.0;
  std::vector<double> lip_ladder = {1e2, 1e3, 1e4};  // multiples of sqrt(kappa)
  double t_end_factor = 0.95;                        // of 1/kappa
  bool run_control = true;
  int n_snapshots = 160;
};

struct BlowupExperimentReport {
  // construction
  double kappa = 0.0, lambda = 0.0, R = 0.0, M = 0.0;
  double b_value = 0.0;        // adaptive-quadrature value
  double b_grid = 0.0;         // same functional on the solver grid weights
  double predicted_bound = 0.0;
  double kappa_case = 0.0;     // enlarged quadratic cap of the bumped data

  // measurement
  SolveStatus status = SolveStatus::Completed;
  double t_stop = 0.0;
  std::vector<double> ladder_thresholds;
  std::vector<double> ladder_t_star;
  std::vector<double> ladder_t_cross;
  double measured_t_star = 0.0;  // middle rung of the ladder
  double slack = 0.0;            // spread of the ladder estimates

  // functional checks
  std::vector<std::pair<double, double>> j_series;  // (t, J)
  double j_ineq_worst = 0.0;  // min over time of J - b - (kappa/4) int (e^J - 1)
  bool j_inequality_ok = false;
  double exp_moment_worst = 0.0;  // most negative normalized envelope margin
  bool exp_moment_ok = false;

  // control run (bump removed)
  bool control_ran = false;
  bool control_no_blowup = false;
  double control_q_err = 0.0;  // max relative deviation of q(t) from kappa/(1 - kappa t)

  // the main run, for snapshot/diagnostics output
  SolveResult main_run;
  GridSpec grid_used;
  YRange range_used;
};

BlowupExperimentReport run_blowup_experiment(const BlowupExperimentConfig& cfg);

/// Locality probe: two disjointly supported bumps on a bounded interval,
/// solved jointly and separately on the same grid; the union must match the
/// sum where supports stay disjoint.
struct CutPasteConfig {
  double L = 6.0;
  double gap = 1.0;
  double amp_left = 0.5;
  double amp_right = 0.7;
  double kappa = 4.0;
  double dy = 1.0 / 32.0;
  double t_end = 0.3;
  int refine_levels = 2;
};

struct CutPasteReport {
  std::vector<double> dys;
  std::vector<double> rel_discrepancy;  // max |u_union - u_left - u_right| / scale
  bool shrinking = false;
  double finest = 0.0;
  bool left_admissible = false, right_admissible = false;

  // finest-level union run, for snapshot/diagnostics output
  SolveResult union_run;
  DomainCase union_case;
};

CutPasteReport run_cut_paste_experiment(const InitialCondition& left,
                                        const InitialCondition& right,
                                        const CutPasteConfig& cfg);

/// Convenience builder: bumps at the standard layout for the config.
CutPasteReport run_cut_paste_experiment(const CutPasteConfig& cfg);

}  // namespace qheat
