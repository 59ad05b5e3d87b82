#include "qheat/gprofile.hpp"

#include <cmath>

#include "qheat/quadrature.hpp"

namespace qheat {

GProfile GProfile::for_interval(double L) {
  require(L > 0.0, "GProfile: L must be positive");
  GProfile g;
  g.x_end_ = L;
  // 2 d^2 near both ends, capped across the midpoint by curvature -4;
  // pieces meet C^1 at L/4 and 3L/4, G(L/2) = (L/2)^2 = d(L/2)^2.
  g.pieces_.push_back({0.0, 0.0, false, 0.0, 0.0, 2.0, 0.0, 0.0});
  g.pieces_.push_back(
      {0.25 * L, 0.5 * L, false, 0.25 * L * L, 0.0, -2.0, 0.0, 0.0});  // L^2/4 - 2 (x - L/2)^2
  g.pieces_.push_back({0.75 * L, L, false, 0.0, 0.0, 2.0, 0.0, 0.0});  // 2 (L - x)^2
  return g;
}

GProfile GProfile::for_half_line(double gamma) {
  require(gamma >= 0.0 && gamma <= 2.0, "GProfile: gamma in [0, 2]");
  GProfile g;
  if (gamma == 2.0) {
    // no corner: the upper envelope 2x^2 works globally
    g.pieces_.push_back({0.0, 0.0, false, 0.0, 0.0, 2.0, 0.0, 0.0});
    return g;
  }
  // 2x^2 up to xa, a concave cap with G'' = -4 bridging the corner of
  // x^2 ^ x^gamma at x = 1, then the tail 2x^gamma. The cap is tangent to
  // both branches of the upper envelope; tangency pins (xa, xb):
  //   xa = xb/2 + gamma xb^{gamma-1}/4,  q(xb) = 2 xb^gamma.
  auto xa_of = [gamma](double xb) {
    return 0.5 * xb + 0.25 * gamma * std::pow(xb, gamma - 1.0);
  };
  auto mismatch = [&](double xb) {
    const double xa = xa_of(xb);
    const double d = xb - xa;
    const double q = 2.0 * xa * xa + 4.0 * xa * d - 2.0 * d * d;
    return q - 2.0 * std::pow(xb, gamma);
  };
  const double xb = bisect(mismatch, 1.0 + 1e-12, 8.0, 1e-13);
  const double xa = xa_of(xb);
  require(xa > 0.0 && xa < 1.0 && xb > 1.0, "GProfile: cap tangency out of range");

  g.pieces_.push_back({0.0, 0.0, false, 0.0, 0.0, 2.0, 0.0, 0.0});
  g.pieces_.push_back({xa, xa, false, 2.0 * xa * xa, 4.0 * xa, -2.0, 0.0, 0.0});
  g.pieces_.push_back({xb, xb, true, 0.0, 0.0, 0.0, 2.0, gamma});
  return g;
}

double GProfile::value(double x) const {
  if (x <= 0.0 || x >= x_end_) return 0.0;
  size_t k = pieces_.size() - 1;
  while (k > 0 && x < pieces_[k].x_lo) --k;
  const Piece& p = pieces_[k];
  if (p.is_power) return p.amp * std::pow(x, p.expo);
  const double s = x - p.x_ref;
  return p.c0 + p.c1 * s + p.c2 * s * s;
}

double GProfile::d2(double x) const {
  if (x <= 0.0 || x >= x_end_) return 0.0;
  size_t k = pieces_.size() - 1;
  while (k > 0 && x < pieces_[k].x_lo) --k;
  const Piece& p = pieces_[k];
  if (p.is_power) return p.amp * p.expo * (p.expo - 1.0) * std::pow(x, p.expo - 2.0);
  return 2.0 * p.c2;
}

void GProfile::verify_envelope(const DomainCase& c, int n) const {
  const double hi = std::isfinite(x_end_) ? x_end_ : 4.0 * pieces_.back().x_lo + 16.0;
  for (int i = 1; i < n; ++i) {
    const double x = hi * i / n;
    const double m = c.envelope_lower(x);
    const double G = value(x);
    const double tol = 1e-12 * (1.0 + m);
    if (G < m - tol || G > 2.0 * m + tol)
      throw std::runtime_error("GProfile: envelope violated at x = " + std::to_string(x));
    if (std::abs(d2(x)) > 4.0 + 1e-12)
      throw std::runtime_error("GProfile: |G''| > 4 at x = " + std::to_string(x));
  }
}

}  // namespace qheat
