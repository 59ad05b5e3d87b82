#pragma once

#include <optional>
#include <vector>

#include "qheat/barriers.hpp"
#include "qheat/field.hpp"

namespace qheat {

/// Per-step scalar diagnostics. Quantities marked "sup" range over the
/// trusted slice of the grid (boundary-influenced nodes excluded).
struct DiagnosticsReport {
  double t = 0.0;
  double lip_sqrt = 0.0;       // sup adjacent-node |delta sqrt(u)| / delta x
  double q_ratio = 0.0;        // sup u / x^2 (resp. u / d^2), singular nodes excluded
  double d2_sup = 0.0;         // sup |d2u/dx2|
  double d2_at_zero = 0.0;     // one-sided d2u/dx2 toward the boundary (NaN on the line)
  double zero_residual = 0.0;  // max u over the zero set of u0
  double barrier_margin = 0.0; // min(super - u, u - sub); negative = violation
  double v_max = 0.0;
  double u_max = 0.0;          // field scale over the trusted slice
  double trust_margin_y = 0.0;
};

/// Max over adjacent node pairs of |sqrt(u_{i+1}) - sqrt(u_i)| / (x_{i+1} - x_i).
double lip_sqrt_estimate(const Field& u, const Field& x);

/// Solution of the boundary curvature flow ds/dt = s^2/2: 2 / (2/s0 - t).
/// Requires s0 > 0 and t < 2/s0 (throws BlowupTimeError past that).
double riccati_reference(double s0, double t);

/// Sup over nodes of u / x^2 (half-line), u / d^2 (interval) or u / <x>^2
/// (whole line), excluding nodes with x (resp. d) below the guard width.
double q_functional_snapshot(const Field& u, const Field& x, const DomainCase& c, double guard);

/// One-sided second derivative from three nonuniformly spaced nodes
/// x[i0] < x[i0+1] < x[i0+2]; exact for quadratics.
double one_sided_d2(const Field& x, const Field& u, Index i0);

/// Assemble the full report from a transformed field. zero_nodes lists grid
/// indices where u0 vanishes; trust_lo/hi bound the trusted slice.
DiagnosticsReport compute_report(const FieldPair& f, const Transform& T, const DomainCase& c,
                                 const BarrierPair* barriers,
                                 const std::vector<Index>& zero_nodes, Index trust_lo,
                                 Index trust_hi, double trust_margin_y);

}  // namespace qheat
