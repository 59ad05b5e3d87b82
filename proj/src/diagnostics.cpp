#include "qheat/diagnostics.hpp"

#include <cmath>

namespace qheat {

double lip_sqrt_estimate(const Field& u, const Field& x) {
  require(u.size() == x.size(), "lip_sqrt_estimate: length mismatch");
  double lip = 0.0;
  for (Index i = 0; i + 1 < u.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    if (dx <= 0.0) continue;
    const double ds = std::sqrt(std::max(0.0, u[i + 1])) - std::sqrt(std::max(0.0, u[i]));
    lip = std::max(lip, std::abs(ds) / dx);
  }
  return lip;
}

double riccati_reference(double s0, double t) {
  require(s0 > 0.0, "riccati_reference: s0 must be positive");
  const double t_star = 2.0 / s0;
  if (t >= t_star) throw BlowupTimeError(t_star);
  return 2.0 / (t_star - t);
}

double q_functional_snapshot(const Field& u, const Field& x, const DomainCase& c, double guard) {
  double q = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    double denom;
    switch (c.kind) {
      case IntervalKind::HalfLine: denom = x[i] * x[i]; break;
      case IntervalKind::BoundedInterval: {
        const double d = c.dist(x[i]);
        denom = d * d;
        break;
      }
      case IntervalKind::WholeLine: denom = bracket(x[i]) * bracket(x[i]); break;
      default: denom = 0.0;
    }
    const double gate = c.kind == IntervalKind::WholeLine ? 1.0 : std::sqrt(denom);
    if (gate < guard) continue;  // singular-ratio guard
    q = std::max(q, u[i] / denom);
  }
  return q;
}

double one_sided_d2(const Field& x, const Field& u, Index i0) {
  require(i0 + 2 < x.size(), "one_sided_d2: needs three nodes");
  const double x0 = x[i0], x1 = x[i0 + 1], x2 = x[i0 + 2];
  const double h1 = x1 - x0, h2 = x2 - x0, h12 = x2 - x1;
  return 2.0 * (u[i0] / (h1 * h2) - u[i0 + 1] / (h1 * h12) + u[i0 + 2] / (h2 * h12));
}

DiagnosticsReport compute_report(const FieldPair& f, const Transform& T, const DomainCase& c,
                                 const BarrierPair* barriers,
                                 const std::vector<Index>& zero_nodes, Index trust_lo,
                                 Index trust_hi, double trust_margin_y) {
  DiagnosticsReport r;
  r.t = f.t;
  r.v_max = f.v.maxCoeff();
  r.trust_margin_y = trust_margin_y;

  const auto phys = v_to_u_derivatives(f, T);
  const Index n = f.size();
  trust_lo = std::max<Index>(0, trust_lo);
  trust_hi = std::min<Index>(n - 1, trust_hi);
  const Index m = trust_hi - trust_lo + 1;
  if (m < 3) {
    r.d2_at_zero = std::numeric_limits<double>::quiet_NaN();
    return r;  // trust region exhausted; scalars stay at defaults
  }

  const auto x = phys.x.segment(trust_lo, m);
  const auto u = phys.u.segment(trust_lo, m);
  const auto d2 = phys.d2u_dx2.segment(trust_lo, m);

  r.lip_sqrt = lip_sqrt_estimate(u, x);
  r.q_ratio = q_functional_snapshot(u, x, c, f.grid.dy);
  r.d2_sup = d2.abs().maxCoeff();
  r.u_max = u.maxCoeff();

  if (c.kind == IntervalKind::WholeLine) {
    r.d2_at_zero = std::numeric_limits<double>::quiet_NaN();
  } else {
    // forward stencil at the boundary-most trusted nodes; the transformed
    // grid piles nodes up against the boundary, so these sit deep in the
    // quadratic regime
    r.d2_at_zero = one_sided_d2(x, u, 0);
  }

  double zr = 0.0;
  for (Index k : zero_nodes)
    if (k >= 0 && k < n) zr = std::max(zr, phys.u[k]);
  if (c.has_boundary()) {
    zr = std::max(zr, phys.u[0]);
    if (c.kind == IntervalKind::BoundedInterval) zr = std::max(zr, phys.u[n - 1]);
  }
  r.zero_residual = zr;

  if (barriers != nullptr) {
    double margin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) {
      const double sup = barriers->super.eval(f.t, x[i]);
      const double sub = barriers->sub.eval(f.t, x[i]);
      margin = std::min(margin, std::min(sup - u[i], u[i] - sub));
    }
    r.barrier_margin = margin;
  } else {
    r.barrier_margin = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace qheat
