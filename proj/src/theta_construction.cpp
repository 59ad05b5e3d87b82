#include "qheat/theta_construction.hpp"

#include <cmath>

#include "qheat/quadrature.hpp"
#include "qheat/smooth_bump.hpp"

namespace qheat {

double blowup_bound(double kappa, double b) {
  require(kappa > 0.0, "blowup_bound: kappa must be positive");
  if (b < std::log(2.0))
    throw std::invalid_argument("blowup_bound: inapplicable for b < log 2");
  return 8.0 / (kappa * std::exp(b));
}

namespace {

std::function<double(double)> make_theta(double kappa, double lambda, double R, double M) {
  (void)lambda;
  return [kappa, R, M](double y) {
    if (y <= -R - 1.0 || y >= 2.0) return 0.0;
    const double rise = smooth_step(y, -R - 1.0, -R);
    const double fall = 1.0 - smooth_step(y, 1.0, 2.0);
    // kappa e^{-y} * cap_unit((M/kappa) e^y) written overflow-free:
    // equals M / (1 + z^4)^{1/4} with z = (M/kappa) e^y
    const double z = M / kappa * std::exp(y);
    const double z2 = z * z;
    return M / std::pow(1.0 + z2 * z2, 0.25) * rise * fall;
  };
}

}  // namespace

double b_of_theta(const std::function<double(double)>& theta, double kappa, double lambda,
                  double lo, double hi) {
  auto integrand = [&](double y) {
    return rho_weight(lambda, y) * std::log1p(theta(y) / kappa);
  };
  return integrate(integrand, lo, hi, 1e-11) - 2.0 * lambda;
}

BlowupConstruction build_theta_lambda(double kappa, double lambda, double target_b) {
  require(kappa > 0.0, "build_theta_lambda: kappa must be positive");
  require(lambda > 0.0 && lambda <= 0.5, "build_theta_lambda: lambda must lie in (0, 1/2]");
  require(target_b >= std::log(16.0), "build_theta_lambda: target_b must be >= log 16");
  if (1.0 / lambda - 2.0 * lambda < target_b)
    throw std::invalid_argument(
        "build_theta_lambda: target unreachable at this lambda (1/lambda - 2 lambda < "
        "target); pick a smaller lambda");

  const double R_cap = 50.0 / lambda;
  auto b_at = [&](double R, double M) {
    auto th = make_theta(kappa, lambda, R, M);
    return b_of_theta(th, kappa, lambda, -R - 1.0, 2.0);
  };

  // raise the cap until the target is reachable within the radius budget
  double M = 32.0 * kappa;
  for (int tries = 0; b_at(R_cap, M) < target_b + 0.008; ++tries) {
    require(tries < 40, "build_theta_lambda: cap search failed");
    M *= 2.0;
  }

  // b is increasing in R; aim for the middle of [target, target + 0.01]
  const double want = target_b + 0.005;
  double lo = 1e-3, hi = R_cap;
  require(b_at(lo, M) < want, "build_theta_lambda: bracket degenerate");
  for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (b_at(mid, M) < want ? lo : hi) = mid;
  }
  const double R = 0.5 * (lo + hi);

  BlowupConstruction out;
  out.kappa = kappa;
  out.lambda = lambda;
  out.R = R;
  out.M = M;
  out.theta = make_theta(kappa, lambda, R, M);
  out.b_value = b_of_theta(out.theta, kappa, lambda, -R - 1.0, 2.0);
  require(out.b_value >= target_b - 1e-6 && out.b_value <= target_b + 0.01 + 1e-6,
          "build_theta_lambda: bisection missed the target window");
  out.predicted_bound = blowup_bound(kappa, out.b_value);
  out.vartheta = [theta = out.theta](double x) {
    if (x <= 0.0) return 0.0;
    return x * x * theta(std::log(x));
  };
  return out;
}

}  // namespace qheat
