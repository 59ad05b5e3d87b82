#pragma once

#include <vector>

#include "qheat/solver.hpp"

namespace qheat {

/// Bilinear lookup table of sqrt(u) on a uniform (t, x) box, resampled from a
/// solve trajectory. Interpolating sqrt(u) rather than u keeps the diffusion
/// coefficient exact at the zero set and nonnegative everywhere.
class FieldInterpolator {
 public:
  FieldInterpolator(const SolveResult& traj, const Transform& T, Index nx = 16384);

  double sqrt_u(double t, double x) const;
  double u(double t, double x) const {
    const double s = sqrt_u(t, x);
    return s * s;
  }

  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  double t_hi() const { return t_hi_; }
  bool contains(double x) const { return x >= x_lo_ && x <= x_hi_; }

 private:
  double x_lo_ = 0.0, x_hi_ = 0.0, hx_ = 1.0;
  double t_hi_ = 0.0, ht_ = 1.0;
  Index nx_ = 0;
  std::vector<Field> slices_;  // sqrt(u) per snapshot on the uniform x grid
};

/// Forward ensemble of dX = sqrt(u(T - t, X)) dB with per-path deterministic
/// streams. Paths leaving the tabulated box are frozen and counted; the
/// ensemble is valid while fewer than 1% exit.
struct PathEnsemble {
  long n_paths = 0;
  double dt_sde = 0.0;
  double x0 = 0.0;
  double T = 0.0;
  uint64_t rng_seed = 0;
  std::vector<double> terminal_values;     // u(0, X(T)) samples
  std::vector<double> record_times;        // includes 0 and T
  std::vector<std::vector<double>> x_at;   // [record][path]
  long n_exited = 0;
  double exit_fraction = 0.0;
  bool valid = false;
};

PathEnsemble simulate_paths(const SolveResult& traj, const Transform& T, double x0, double T_hor,
                            long n_paths, double dt_sde, uint64_t seed, int n_records = 21);

PathEnsemble simulate_paths(const FieldInterpolator& u, double x0, double T_hor, long n_paths,
                            double dt_sde, uint64_t seed, int n_records = 21);

/// Conditional-mean check of the decoupling identity: bin paths by X(t_check)
/// and compare bin means of u(0, X(T)) against bin means of
/// u(T - t_check, X(t_check)), standardized by the within-bin standard error
/// of the difference. Bins need >= 500 samples to count.
struct DecouplingReport {
  struct Bin {
    double center = 0.0;
    long count = 0;
    double mean_terminal = 0.0;
    double mean_field = 0.0;
    double se_diff = 0.0;
    double std_residual = 0.0;
  };
  std::vector<Bin> bins;
  double max_std_residual = 0.0;
  bool conclusive = false;
};

DecouplingReport check_decoupling(const PathEnsemble& e, const FieldInterpolator& u,
                                  double t_check, int n_bins);

/// Sample mean of Y(t) = u(T - t, X(t)) across the recorded times, with the
/// drift from Y(0) standardized by the per-time standard error.
struct MartingaleReport {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> se;
  double y0 = 0.0;
  double max_std_drift = 0.0;
};

MartingaleReport martingale_check(const PathEnsemble& e, const FieldInterpolator& u);

double mean_of(const std::vector<double>& xs);
double variance_of(const std::vector<double>& xs);

}  // namespace qheat
