#include "qheat/barriers.hpp"

#include <cmath>
#include <memory>

#include "qheat/quadrature.hpp"

namespace qheat {

Barrier quadratic_solution(double a, double b, double c) {
  Barrier B;
  B.kind = "quadratic_solution";
  B.is_super = true;
  B.is_exact = true;
  B.t_max = a > 0.0 ? 1.0 / a : std::numeric_limits<double>::infinity();
  B.params = {{"a", a}, {"b", b}, {"c", c}};
  B.eval = [a, b, c, t_star = B.t_max](double t, double x) {
    if (t >= t_star) throw BlowupTimeError(t_star);
    return (a * x * x + b * x + c) / (1.0 - a * t);
  };
  return B;
}

BarrierPair interval_barriers(const DomainCase& c, double eps, bool validate) {
  require(c.kind == IntervalKind::BoundedInterval, "interval_barriers: wrong case kind");
  require(eps >= 0.0, "interval_barriers: eps must be nonnegative");
  const double kappa = c.kappa, K = c.K, L = c.L;
  const double horizon = 1.0 / kappa;

  auto gp = std::make_shared<GProfile>(GProfile::for_interval(L));
  gp->verify_envelope(c);

  BarrierPair pair;
  pair.super.kind = "interval_super";
  pair.super.is_super = true;
  pair.super.t_max = horizon;
  pair.super.params = {{"kappa", kappa}, {"K", K}, {"L", L}, {"eps", eps}};
  pair.super.eval = [c, kappa, eps, horizon](double t, double x) {
    if (t >= horizon) throw BlowupTimeError(horizon);
    const double d = c.dist(x);
    return (d * d + eps / kappa) / (1.0 / kappa - t);
  };

  pair.sub.kind = "interval_sub";
  pair.sub.is_super = false;
  pair.sub.params = {{"kappa", kappa}, {"K", K}, {"L", L}, {"eps", eps}};
  pair.sub.eval = [gp, K, eps](double t, double x) {
    return (gp->value(x) + eps) / (2.0 * (t + K));
  };

  if (validate) {
    validate_barrier_sign(pair.super, 0.0, 0.9 * horizon, 0.02 * L, 0.98 * L);
    validate_barrier_sign(pair.sub, 0.0, 0.9 * horizon, 0.02 * L, 0.98 * L);
  }
  return pair;
}

BarrierPair line_barriers(const DomainCase& c, bool validate) {
  require(c.kind == IntervalKind::WholeLine, "line_barriers: wrong case kind");
  const double kappa = c.kappa, K = c.K, gamma = c.gamma;
  BarrierPair pair;

  if (gamma == 2.0) {
    const double horizon = 1.0 / kappa;
    pair.sub.kind = "line_sub_quadratic";
    pair.sub.is_super = false;
    pair.sub.params = {{"kappa", kappa}, {"K", K}, {"gamma", gamma}};
    pair.sub.eval = [K](double, double x) { return (x * x + 1.0) / K; };

    pair.super.kind = "line_super_quadratic";
    pair.super.is_super = true;
    pair.super.t_max = horizon;
    pair.super.params = {{"kappa", kappa}, {"K", K}, {"gamma", gamma}};
    pair.super.eval = [kappa, K, horizon](double t, double x) {
      if (t >= horizon) throw BlowupTimeError(horizon);
      return (x * x + K / kappa) / (1.0 / kappa - t);
    };
  } else {
    const double D = compute_D(K, gamma);
    pair.sub.kind = "line_sub_powerlaw";
    pair.sub.is_super = false;
    pair.sub.params = {{"kappa", kappa}, {"K", K}, {"gamma", gamma}};
    pair.sub.eval = [K, gamma](double t, double x) {
      return std::pow(bracket(x), gamma) / (t + K);
    };

    pair.super.kind = "line_super_powerlaw";
    pair.super.is_super = true;
    pair.super.params = {{"kappa", kappa}, {"K", K}, {"gamma", gamma}, {"D", D}};
    pair.super.eval = [K, gamma, D](double t, double x) {
      const double a = 2.0 - 1.0 / (t + 1.0);
      return K * a * std::pow(bracket(x), gamma) + D * std::exp(3.0 * K * t);
    };
  }

  if (validate) {
    const double t_hi = gamma == 2.0 ? 0.9 / kappa : 2.0;
    validate_barrier_sign(pair.sub, 0.0, t_hi, -20.0, 20.0);
    validate_barrier_sign(pair.super, 0.0, t_hi, -20.0, 20.0);
  }
  return pair;
}

BarrierPair half_line_barriers(const DomainCase& c, double eps, bool validate) {
  require(c.kind == IntervalKind::HalfLine, "half_line_barriers: wrong case kind");
  require(eps >= 0.0, "half_line_barriers: eps must be nonnegative");
  const double kappa = c.kappa, K = c.K, gamma = c.gamma;
  const double horizon = 1.0 / kappa;

  auto gp = std::make_shared<GProfile>(GProfile::for_half_line(gamma));
  gp->verify_envelope(c);

  BarrierPair pair;
  pair.super.kind = "half_super";
  pair.super.is_super = true;
  pair.super.t_max = horizon;
  pair.super.params = {{"kappa", kappa}, {"K", K}, {"gamma", gamma}, {"eps", eps}};
  if (gamma == 2.0) {
    pair.super.eval = [kappa, eps, horizon](double t, double x) {
      if (t >= horizon) throw BlowupTimeError(horizon);
      return (x * x + eps / kappa) / (1.0 / kappa - t);
    };
  } else {
    const double D = compute_D(K, gamma);
    pair.super.params["D"] = D;
    pair.super.eval = [kappa, K, gamma, D, eps, horizon](double t, double x) {
      if (t >= horizon) throw BlowupTimeError(horizon);
      const double quad = (x * x + eps / kappa) / (1.0 / kappa - t);
      const double a = 2.0 - 1.0 / (t + 1.0);
      const double pow_part = K * a * std::pow(bracket(x), gamma) + D * std::exp(3.0 * K * t);
      return std::min(quad, pow_part);
    };
  }

  pair.sub.kind = "half_sub";
  pair.sub.is_super = false;
  pair.sub.params = {{"kappa", kappa}, {"K", K}, {"gamma", gamma}, {"eps", eps}};
  pair.sub.eval = [gp, K, eps](double t, double x) {
    return (gp->value(x) + eps) / (2.0 * (t + K));
  };

  if (validate) {
    validate_barrier_sign(pair.super, 0.0, 0.9 * horizon, 0.05, 20.0);
    validate_barrier_sign(pair.sub, 0.0, 0.9 * horizon, 0.05, 20.0);
  }
  return pair;
}

double compute_D(double K, double gamma) {
  require(gamma < 2.0, "compute_D: exponent undefined at gamma = 2");
  require(K >= 1.0, "compute_D: K must be >= 1");
  const double e = 4.0 / (2.0 - gamma);
  auto f = [K, e](double t) {
    return K * std::pow(4.0 * K * (t + 1.0) * (t + 1.0), e) * std::exp(-K * t);
  };
  // log f is strictly concave; bracket the maximizer with a coarse scan
  const double t_hi = std::max(4.0 * e / K + 2.0, 4.0);
  double best_t = 0.0, best = f(0.0);
  const int n_scan = 64;
  for (int i = 1; i <= n_scan; ++i) {
    const double t = t_hi * i / n_scan;
    if (f(t) > best) {
      best = f(t);
      best_t = t;
    }
  }
  const double lo = std::max(0.0, best_t - t_hi / n_scan);
  const double hi = std::min(t_hi, best_t + t_hi / n_scan);
  const double t_star = golden_max(f, lo, hi, 1e-10);
  return 1.01 * std::max(best, f(t_star));
}

double nh_residual_fd(const std::function<double(double, double)>& w, double t, double x) {
  const double ht = 2e-6 * (1.0 + std::abs(t));
  const double hx = 1e-4 * (1.0 + std::abs(x));
  const double wt = (w(t + ht, x) - w(t - ht, x)) / (2.0 * ht);
  const double wxx = (w(t, x + hx) - 2.0 * w(t, x) + w(t, x - hx)) / (hx * hx);
  return wt - 0.5 * w(t, x) * wxx;
}

void validate_barrier_sign(const Barrier& B, double t_lo, double t_hi, double x_lo, double x_hi,
                           int nt, int nx) {
  constexpr double mach = 2.2e-16;
  for (int it = 0; it < nt; ++it) {
    const double t = t_lo + (t_hi - t_lo) * (it + 0.5) / nt;
    for (int ix = 0; ix < nx; ++ix) {
      const double x = x_lo + (x_hi - x_lo) * (ix + 0.5) / nx;
      const double r = nh_residual_fd(B.eval, t, x);
      const double mag = std::abs(B.eval(t, x));
      // cancellation in the second difference scales like mach * mag / hx^2
      const double ht = 2e-6 * (1.0 + std::abs(t));
      const double hx = 1e-4 * (1.0 + std::abs(x));
      const double fd_noise = mach * (mag / ht + 4.0 * mag * mag / (hx * hx));
      const double tol = 1e-6 * (1.0 + mag) + fd_noise;
      const bool ok = B.is_super ? (r >= -tol) : (r <= tol);
      if (!ok)
        throw std::runtime_error(B.kind + ": NH sign violated at t = " + std::to_string(t) +
                                 ", x = " + std::to_string(x) + " (residual " +
                                 std::to_string(r) + ")");
    }
  }
}

}  // namespace qheat
