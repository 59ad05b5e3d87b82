#pragma once

#include <functional>
#include <map>
#include <string>

#include "qheat/domain.hpp"
#include "qheat/gprofile.hpp"

namespace qheat {

/// Raised when a barrier or explicit solution is evaluated at or past the
/// time where its closed form ceases to exist.
struct BlowupTimeError : std::runtime_error {
  double t_star;
  explicit BlowupTimeError(double ts)
      : std::runtime_error("evaluation at or past blow-up time t* = " + std::to_string(ts)),
        t_star(ts) {}
};

/// Closed-form sub- or supersolution of the nonlinear heat flow
/// NH[w] = dw/dt - (1/2) w d2w/dx2.
struct Barrier {
  std::string kind;
  bool is_super = true;
  bool is_exact = false;  // NH[.] == 0 identically
  double t_max = std::numeric_limits<double>::infinity();
  std::map<std::string, double> params;
  std::function<double(double, double)> eval;  // (t, x)

  double operator()(double t, double x) const { return eval(t, x); }
};

struct BarrierPair {
  Barrier sub;
  Barrier super;
};

/// Q(t, x) = (a x^2 + b x + c) / (1 - a t): an exact solution for t < 1/a.
Barrier quadratic_solution(double a, double b, double c);

/// Bounded interval: supersolution (d^2 + eps/kappa) / (1/kappa - t) and
/// subsolution (G + eps) / (2 (t + K)).
BarrierPair interval_barriers(const DomainCase& c, double eps, bool validate = true);

/// Whole line. gamma = 2: K^{-1}<x>^2 below, (x^2 + K/kappa)/(1/kappa - t)
/// above. gamma < 2: <x>^gamma/(t+K) below, K a(t) <x>^gamma + D e^{3Kt}
/// above with a(t) = 2 - 1/(t+1).
BarrierPair line_barriers(const DomainCase& c, bool validate = true);

/// Half line: supersolution min of the quadratic-rate barrier and (for
/// gamma < 2) the power-law one; subsolution (G + eps)/(2(t + K)).
BarrierPair half_line_barriers(const DomainCase& c, double eps, bool validate = true);

/// Smallest D (1% accuracy, then inflated by 1.01) with
/// D e^{Kt} >= K [4K(t+1)^2]^{4/(2-gamma)} for all t >= 0. Requires gamma < 2.
double compute_D(double K, double gamma);

/// Finite-difference residual of NH at (t, x).
double nh_residual_fd(const std::function<double(double, double)>& w, double t, double x);

/// Check the declared sign of NH on a (t, x) verification grid.
/// Throws std::runtime_error on violation beyond 1e-6 * local magnitude.
void validate_barrier_sign(const Barrier& B, double t_lo, double t_hi, double x_lo, double x_hi,
                           int nt = 64, int nx = 256);

}  // namespace qheat
