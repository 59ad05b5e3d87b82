#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "qheat/types.hpp"

namespace qheat {

enum class IntervalKind { BoundedInterval, WholeLine, HalfLine };

inline std::string to_string(IntervalKind k) {
  switch (k) {
    case IntervalKind::BoundedInterval: return "bounded_interval";
    case IntervalKind::WholeLine: return "whole_line";
    case IntervalKind::HalfLine: return "half_line";
  }
  return "?";
}

/// The interval the problem lives on, together with the growth parameters:
/// kappa caps quadratic growth, gamma is the power-law exponent at infinity,
/// K is the two-sided envelope constant (>= 1).
struct DomainCase {
  IntervalKind kind = IntervalKind::WholeLine;
  double L = 0.0;      // interval length, bounded case only
  double gamma = 2.0;  // in [0, 2], unbounded cases only
  double kappa = 1.0;
  double K = 1.0;

  static DomainCase bounded(double L, double kappa, double K = 1.0) {
    require(L > 0.0, "DomainCase: L must be positive");
    require(kappa > 0.0, "DomainCase: kappa must be positive");
    require(K >= 1.0, "DomainCase: K must be >= 1");
    return {IntervalKind::BoundedInterval, L, 2.0, kappa, K};
  }
  static DomainCase whole_line(double gamma, double kappa, double K = 1.0) {
    require(gamma >= 0.0 && gamma <= 2.0, "DomainCase: gamma must lie in [0, 2]");
    require(kappa > 0.0, "DomainCase: kappa must be positive");
    require(K >= 1.0, "DomainCase: K must be >= 1");
    return {IntervalKind::WholeLine, 0.0, gamma, kappa, K};
  }
  static DomainCase half_line(double gamma, double kappa, double K = 1.0) {
    require(gamma >= 0.0 && gamma <= 2.0, "DomainCase: gamma must lie in [0, 2]");
    require(kappa > 0.0, "DomainCase: kappa must be positive");
    require(K >= 1.0, "DomainCase: K must be >= 1");
    return {IntervalKind::HalfLine, 0.0, gamma, kappa, K};
  }

  /// Distance to the complement of the interval.
  double dist(double x) const {
    switch (kind) {
      case IntervalKind::BoundedInterval: return std::max(0.0, std::min(x, L - x));
      case IntervalKind::WholeLine: return std::numeric_limits<double>::infinity();
      case IntervalKind::HalfLine: return std::max(0.0, x);
    }
    return 0.0;
  }

  bool has_boundary() const { return kind != IntervalKind::WholeLine; }

  /// Lower growth envelope for admissible data: K^{-1} * envelope_lower(x).
  double envelope_lower(double x) const {
    switch (kind) {
      case IntervalKind::BoundedInterval: {
        const double d = dist(x);
        return d * d;
      }
      case IntervalKind::WholeLine: return std::pow(bracket(x), gamma);
      case IntervalKind::HalfLine: {
        if (x <= 0.0) return 0.0;
        return std::min(x * x, std::pow(x, gamma));
      }
    }
    return 0.0;
  }

  /// Upper growth envelope for admissible data, as a function of K.
  double envelope_upper(double x, double Kval) const {
    switch (kind) {
      case IntervalKind::BoundedInterval: {
        const double d = dist(x);
        return kappa * d * d;
      }
      case IntervalKind::WholeLine:
        return std::min(kappa * x * x + Kval, Kval * std::pow(bracket(x), gamma));
      case IntervalKind::HalfLine: {
        if (x <= 0.0) return 0.0;
        return std::min(kappa * x * x, Kval * std::pow(x, gamma));
      }
    }
    return 0.0;
  }
};

}  // namespace qheat
