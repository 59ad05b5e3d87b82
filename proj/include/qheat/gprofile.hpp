#pragma once

#include <vector>

#include "qheat/domain.hpp"

namespace qheat {

/// Piecewise profile G squeezed between the lower growth envelope m and 2m,
/// C^1 with |G''| <= 4 wherever defined. m = d(x)^2 on the bounded interval,
/// m = x^2 ^ x^gamma on the half-line. Used to build subsolutions
/// (G + eps) / (2(t + K)).
///
/// Pieces are quadratics c0 + c1 (x - x_lo) + c2 (x - x_lo)^2 except for an
/// optional power-law tail A x^g on the half-line, where the envelope itself
/// already has curvature below 4.
class GProfile {
 public:
  struct Piece {
    double x_lo = 0.0;   // piece starts here
    double x_ref = 0.0;  // expansion point; at the vertex this avoids cancellation
    bool is_power = false;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // quadratic about x_ref
    double amp = 0.0, expo = 0.0;         // power tail amp * x^expo
  };

  static GProfile for_interval(double L);
  static GProfile for_half_line(double gamma);

  double value(double x) const;
  double d2(double x) const;  // second derivative within the owning piece
  const std::vector<Piece>& pieces() const { return pieces_; }
  double x_end() const { return x_end_; }  // domain end covered by pieces (interval case)

  /// Dense-grid check of m <= G <= 2m and |G''| <= 4; throws on violation.
  void verify_envelope(const DomainCase& c, int n = 4096) const;

 private:
  std::vector<Piece> pieces_;
  double x_end_ = std::numeric_limits<double>::infinity();
};

}  // namespace qheat
