#include "qheat/hypothesis.hpp"

#include <cmath>

#include "qheat/transform.hpp"

namespace qheat {

Field make_validation_grid(const DomainCase& c, Index n) {
  const YRange r{-10.0, 10.0};
  auto T = make_transform(c, r);
  GridSpec g{r.y_min, r.y_max, (r.y_max - r.y_min) / static_cast<double>(n - 1)};
  return T.zeta(g.y_grid());
}

HypothesisCertificate validate_hypothesis(const std::function<double(double)>& u0,
                                          const DomainCase& c) {
  const Field x = make_validation_grid(c);
  Field u(x.size());
  for (Index i = 0; i < x.size(); ++i) u[i] = u0(x[i]);
  return validate_hypothesis_on_grid(x, u, c);
}

HypothesisCertificate validate_hypothesis_on_grid(const Field& x, const Field& u0,
                                                  const DomainCase& c) {
  require(x.size() == u0.size(), "validate_hypothesis: length mismatch");
  HypothesisCertificate cert;
  cert.domain = c;

  for (Index i = 0; i < u0.size(); ++i) {
    if (u0[i] < 0.0) throw std::invalid_argument("validate_hypothesis: negative u0 at node " +
                                                 std::to_string(i));
  }

  double K_needed = 1.0;
  const double slack = 1.0 + 1e-12;  // forgive roundoff at envelope equality
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x[i], ui = u0[i];
    const double lower = c.envelope_lower(xi);

    // lower bound K^{-1} * envelope <= u0: per-node minimal K
    if (lower > 0.0) {
      if (ui <= 0.0) {
        cert.failing_node = i;
        cert.failing_bound = "lower";
        cert.K_found = std::numeric_limits<double>::infinity();
        return cert;
      }
      K_needed = std::max(K_needed, lower / (ui * slack));
    }

    // fixed-kappa upper bounds are pass/fail; K-scaled ones feed K_needed
    switch (c.kind) {
      case IntervalKind::BoundedInterval: {
        const double d = c.dist(xi);
        if (ui > c.kappa * d * d * slack) {
          cert.failing_node = i;
          cert.failing_bound = "upper_quadratic";
          return cert;
        }
        break;
      }
      case IntervalKind::WholeLine: {
        // u0 <= min(kappa x^2 + K, K <x>^gamma)
        K_needed = std::max(K_needed, (ui - c.kappa * xi * xi) / slack);
        K_needed = std::max(K_needed, ui / (std::pow(bracket(xi), c.gamma) * slack));
        break;
      }
      case IntervalKind::HalfLine: {
        if (ui > c.kappa * xi * xi * slack) {
          cert.failing_node = i;
          cert.failing_bound = "upper_quadratic";
          return cert;
        }
        if (xi > 0.0) K_needed = std::max(K_needed, ui / (std::pow(xi, c.gamma) * slack));
        break;
      }
    }
  }

  cert.K_found = K_needed;
  cert.admissible = std::isfinite(K_needed);

  // measured Lipschitz constant of sqrt(u0) on the grid
  double lip = 0.0;
  for (Index i = 0; i + 1 < x.size(); ++i) {
    const double dx = x[i + 1] - x[i];
    if (dx > 0.0) lip = std::max(lip, std::abs(std::sqrt(u0[i + 1]) - std::sqrt(u0[i])) / dx);
  }
  cert.lip_sqrt_u0 = lip;
  return cert;
}

}  // namespace qheat
