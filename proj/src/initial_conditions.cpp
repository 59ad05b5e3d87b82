#include "qheat/initial_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace qheat {

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& k, double dflt) {
  auto it = p.find(k);
  return it == p.end() ? dflt : it->second;
}

}  // namespace

InitialCondition make_table_ic(const std::string& csv_path) {
  std::ifstream in(csv_path);
  require(bool(in), "table ic: cannot open " + csv_path);
  std::vector<double> xs, us;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, u;
    if (!(row >> x >> u)) continue;  // header or junk
    require(xs.empty() || x > xs.back(), "table ic: x column must increase");
    require(u >= 0.0, "table ic: negative u sample");
    xs.push_back(x);
    us.push_back(u);
  }
  require(xs.size() >= 2, "table ic: need at least two samples");
  InitialCondition ic;
  ic.family = "table";
  ic.params = {{"n_samples", static_cast<double>(xs.size())}};
  ic.fn = [xs = std::move(xs), us = std::move(us)](double q) {
    if (q <= xs.front() || q >= xs.back()) {
      if (q == xs.front()) return us.front();
      if (q == xs.back()) return us.back();
      return 0.0;
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), q);
    const size_t k = static_cast<size_t>(it - xs.begin()) - 1;
    const double w = (q - xs[k]) / (xs[k + 1] - xs[k]);
    return us[k] + w * (us[k + 1] - us[k]);
  };
  return ic;
}

InitialCondition make_named_ic(const std::string& family,
                               const std::map<std::string, double>& params, const DomainCase& c) {
  InitialCondition ic;
  ic.family = family;
  ic.params = params;

  if (family == "quadratic") {
    const double coeff = param_or(params, "coeff", c.kappa);
    ic.params["coeff"] = coeff;
    ic.fn = [coeff](double x) { return coeff * x * x; };
    return ic;
  }
  if (family == "quadratic_plus_one") {
    ic.fn = [](double x) { return x * x + 1.0; };
    return ic;
  }
  if (family == "power_law") {
    const double g = param_or(params, "gamma", c.gamma);
    ic.params["gamma"] = g;
    ic.fn = [g](double x) { return std::pow(bracket(x), g); };
    return ic;
  }
  if (family == "bump_on_interval") {
    const double a = param_or(params, "a", 0.0);
    const double b = param_or(params, "b", c.L > 0.0 ? c.L : 1.0);
    const double amp = param_or(params, "amp", 1.0);
    require(b > a, "bump_on_interval: b must exceed a");
    require(amp > 0.0, "bump_on_interval: amp must be positive");
    ic.params["a"] = a;
    ic.params["b"] = b;
    ic.params["amp"] = amp;
    const double w4 = std::pow(b - a, 4);
    ic.fn = [a, b, amp, w4](double x) {
      if (x <= a || x >= b) return 0.0;
      const double s = (x - a) * (b - x);
      return amp * 16.0 * s * s / w4;
    };
    return ic;
  }
  throw std::invalid_argument("unknown initial-condition family: " + family);
}

std::vector<FamilyInfo> ic_catalog() {
  return {
      {"quadratic", "half_line gamma=2: admissible with K = kappa/coeff for coeff <= kappa"},
      {"quadratic_plus_one",
       "whole_line gamma=2: admissible, K = max(1, 1/kappa); equals <x>^2 when kappa = 1"},
      {"power_law", "whole_line any gamma in [0,2], any kappa: admissible with K = 1"},
      {"bump_on_interval",
       "bounded_interval (a,b): admissible for kappa >= 16 amp/(b-a)^2, K = (b-a)^2/(4 amp)"},
      {"quadratic_plus_bump",
       "half_line gamma=2: admissible with enlarged kappa' = kappa + max theta; built by the "
       "early-blow-up construction (lambda parameter)"},
  };
}

}  // namespace qheat
