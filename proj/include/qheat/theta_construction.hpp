#pragma once

#include <functional>

#include "qheat/types.hpp"

namespace qheat {

/// A concrete compactly supported smooth bump theta on the log coordinate,
/// squeezed under the envelope kappa e^{-y}, tuned so that the weighted
/// integral b = int rho log(theta/kappa + 1) - 2 lambda hits a target.
/// rho(y) = lambda e^{lambda y} has unit mass on the negative half-axis.
struct BlowupConstruction {
  double kappa = 1.0;
  double lambda = 0.1;
  double R = 0.0;        // envelope followed down to y = -R; support ends at -R-1
  double M = 0.0;        // cap on theta
  double b_value = 0.0;  // achieved b (adaptive quadrature)
  double predicted_bound = 0.0;  // 8 / (kappa e^b)

  std::function<double(double)> theta;     // log coordinate
  std::function<double(double)> vartheta;  // physical: x^2 theta(log x)
};

/// Exponential weight rho(y) = lambda e^{lambda y}.
inline double rho_weight(double lambda, double y) { return lambda * std::exp(lambda * y); }

/// Divergence-time bound 8 / (kappa e^b); requires b >= log 2.
double blowup_bound(double kappa, double b);

/// Build theta by bisection on the support radius R under a fixed-policy cap
/// M (doubled from 32 kappa until the target is reachable), so that
/// b lands in [target_b, target_b + 0.01]. Preconditions: lambda in (0, 1/2],
/// target_b >= log 16, and 1/lambda - 2 lambda >= target_b.
BlowupConstruction build_theta_lambda(double kappa, double lambda, double target_b);

/// The b functional for a candidate theta (adaptive quadrature over [lo, hi]).
double b_of_theta(const std::function<double(double)>& theta, double kappa, double lambda,
                  double lo, double hi);

}  // namespace qheat
