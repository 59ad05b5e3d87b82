#pragma once

#include <cmath>

namespace qheat {

// exp(-1/s) for s > 0, extended by 0, with first and second derivatives.
// The building block of the standard smooth partition of unity.
struct ExpBump {
  double g = 0.0, dg = 0.0, d2g = 0.0;
  explicit ExpBump(double s) {
    if (s <= 0.0) return;
    // underflows cleanly to 0 for tiny s
    g = std::exp(-1.0 / s);
    const double s2 = s * s;
    dg = g / s2;
    d2g = g * (1.0 - 2.0 * s) / (s2 * s2);
  }
};

/// C-infinity cutoff with psi = 1 on (-inf, -1], psi = 0 on [1, infinity),
/// built from the exp(-1/s) partition. Carries psi, psi', psi''.
struct SmoothCutoff {
  double value = 0.0, d1 = 0.0, d2 = 0.0;

  explicit SmoothCutoff(double z) {
    if (z <= -1.0) {
      value = 1.0;
      return;
    }
    if (z >= 1.0) return;
    const ExpBump A(1.0 - z);  // vanishes at z = 1
    const ExpBump B(1.0 + z);  // vanishes at z = -1
    const double a = A.g, b = B.g;
    const double ap = -A.dg, bp = B.dg;  // d/dz of A.g, B.g
    const double app = A.d2g, bpp = B.d2g;
    const double den = a + b;
    value = a / den;
    d1 = (ap * b - a * bp) / (den * den);
    const double num2 = (app * b - a * bpp) * den - 2.0 * (ap * b - a * bp) * (ap + bp);
    d2 = num2 / (den * den * den);
  }
};

/// Smooth step rising 0 -> 1 as z goes from z0 to z1.
inline double smooth_step(double z, double z0, double z1) {
  // map to [-1, 1] and reuse the cutoff (which falls 1 -> 0)
  const double s = -1.0 + 2.0 * (z - z0) / (z1 - z0);
  return 1.0 - SmoothCutoff(s).value;
}

}  // namespace qheat
