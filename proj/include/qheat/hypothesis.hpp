#pragma once

#include <functional>
#include <optional>
#include <string>

#include "qheat/domain.hpp"
#include "qheat/types.hpp"

namespace qheat {

/// Grid-verified admissibility of initial data against the two-sided growth
/// envelope of its interval case.
struct HypothesisCertificate {
  DomainCase domain;
  double K_found = 1.0;       // smallest K making all grid inequalities hold
  double lip_sqrt_u0 = 0.0;   // measured Lipschitz constant of sqrt(u0)
  bool admissible = false;
  Index failing_node = -1;    // set when violated
  std::string failing_bound;  // "lower" | "upper_quadratic" | "upper_power" | "negative"
};

/// Check the growth envelope of u0 on a validation grid and search the
/// smallest admissible K. The fixed-kappa bounds are pass/fail; the K-scaled
/// bounds yield the per-node minimal K, maximized over the grid.
HypothesisCertificate validate_hypothesis(const std::function<double(double)>& u0,
                                          const DomainCase& c);

/// Same, on a caller-provided x-grid with precomputed samples.
HypothesisCertificate validate_hypothesis_on_grid(const Field& x, const Field& u0,
                                                  const DomainCase& c);

/// Default validation grid for a case: image of a uniform transformed grid,
/// so nodes concentrate where the envelope degenerates.
Field make_validation_grid(const DomainCase& c, Index n = 2049);

}  // namespace qheat
