#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qheat/hypothesis.hpp"

namespace qheat {

/// Initial data: a callable profile plus its admissibility certificate.
struct InitialCondition {
  std::string family;
  std::map<std::string, double> params;
  std::function<double(double)> fn;
  std::optional<HypothesisCertificate> certificate;

  double operator()(double x) const { return fn(x); }
};

inline InitialCondition& attach_certificate(InitialCondition& ic, const DomainCase& c) {
  ic.certificate = validate_hypothesis(ic.fn, c);
  return ic;
}

/// Sampled table data: strictly increasing x column with nonnegative u
/// values, linearly interpolated, zero outside the covered range.
InitialCondition make_table_ic(const std::string& csv_path);

/// Named families exposed by the batch front-end. "quadratic" is coeff * x^2,
/// "quadratic_plus_one" is x^2 + 1, "power_law" is <x>^gamma,
/// "bump_on_interval" is amp * 16 (x-a)^2 (b-x)^2 / (b-a)^4 on (a, b).
/// The fifth family, "quadratic_plus_bump", is assembled by the early-blow-up
/// experiment from its bump construction.
InitialCondition make_named_ic(const std::string& family,
                               const std::map<std::string, double>& params, const DomainCase& c);

struct FamilyInfo {
  std::string name;
  std::string admissibility;  // human-readable (kappa, gamma) guidance
};

std::vector<FamilyInfo> ic_catalog();

}  // namespace qheat
