#pragma once

#include <string>

#include "qheat/transform.hpp"
#include "qheat/types.hpp"

namespace qheat {

/// Time-stamped values of the transformed variable v = zeta'(y)^{-2} u(t, zeta(y))
/// on a uniform y-grid. v is nonnegative at every node.
struct FieldPair {
  double t = 0.0;
  GridSpec grid;
  Field v;

  Index size() const { return v.size(); }
};

/// Physical fields reconstructed on the image grid x_i = zeta(y_i).
struct PhysicalFields {
  Field x;
  Field u;
  Field du_dx;
  Field d2u_dx2;
};

/// Centered first derivative on a uniform grid, second-order one-sided ends.
inline Field diff1(const Field& v, double dy) {
  const Index n = v.size();
  Field d(n);
  for (Index i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dy);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dy);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dy);
  return d;
}

/// Centered second derivative on a uniform grid, second-order one-sided ends.
inline Field diff2(const Field& v, double dy) {
  const Index n = v.size();
  Field d(n);
  const double h2 = dy * dy;
  for (Index i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
  d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
  d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
  return d;
}

/// v = zeta'^{-2} * (u o zeta), nodewise. u values must be sampled on the
/// image grid zeta(y_i) and be nonnegative.
inline FieldPair u_to_v(const Field& u_on_image, const Transform& T, const GridSpec& grid,
                        double t = 0.0) {
  require(u_on_image.size() == grid.n(), "u_to_v: length mismatch with grid");
  for (Index i = 0; i < u_on_image.size(); ++i) {
    if (u_on_image[i] < 0.0)
      throw std::invalid_argument("u_to_v: negative u at node " + std::to_string(i));
  }
  FieldPair f;
  f.t = t;
  f.grid = grid;
  const Field dz = T.dzeta(grid.y_grid());
  f.v = u_on_image / (dz * dz);
  return f;
}

/// Reconstruct u, du/dx, d2u/dx2 on the image grid from the transformed field.
/// Needs at least 5 nodes for the difference stencils.
inline PhysicalFields v_to_u_derivatives(const FieldPair& f, const Transform& T) {
  require(f.size() >= 5, "v_to_u_derivatives: need at least 5 nodes");
  const Field y = f.grid.y_grid();
  const Field z1 = T.dzeta(y), z2 = T.d2zeta(y), z3 = T.d3zeta(y);
  const Field vy = diff1(f.v, f.grid.dy);
  const Field vyy = diff2(f.v, f.grid.dy);
  PhysicalFields out;
  out.x = T.zeta(y);
  out.u = z1 * z1 * f.v;
  out.du_dx = z1 * vy + 2.0 * z2 * f.v;
  out.d2u_dx2 = vyy + 3.0 * (z2 / z1) * vy + 2.0 * (z3 / z1) * f.v;
  return out;
}

}  // namespace qheat
