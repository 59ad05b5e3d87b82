#pragma once

#include <memory>

#include "qheat/domain.hpp"
#include "qheat/types.hpp"

namespace qheat {

/// Truncation box in the transformed coordinate.
struct YRange {
  double y_min = -8.0;
  double y_max = 8.0;
};

/// Uniform grid in the transformed coordinate.
struct GridSpec {
  double y_min = -8.0;
  double y_max = 8.0;
  double dy = 1.0 / 128.0;

  Index n() const { return static_cast<Index>(std::llround((y_max - y_min) / dy)) + 1; }
  double y(Index i) const { return y_min + static_cast<double>(i) * dy; }
  Field y_grid() const {
    const Index m = n();
    Field g(m);
    for (Index i = 0; i < m; ++i) g[i] = y(i);
    return g;
  }
};

/// Change of variables y -> x = zeta(y) mapping the real line onto the
/// interior of the interval, with the first three derivatives. zeta is
/// strictly increasing and zeta' > 0 everywhere; the derivative ratios
/// zeta''/zeta' and zeta'''/zeta' stay bounded, which is what keeps the
/// transformed evolution uniformly parabolic for comparable data.
class Transform {
 public:
  enum class Family { IntervalTanh, LineSinh, LinePower, HalfExp, HalfBlend };

  const DomainCase& domain() const { return case_; }
  const YRange& y_range() const { return range_; }
  Family family() const { return family_; }

  double zeta(double y) const;
  double dzeta(double y) const;
  double d2zeta(double y) const;
  double d3zeta(double y) const;

  Field zeta(const Field& y) const { return map(y, &Transform::zeta); }
  Field dzeta(const Field& y) const { return map(y, &Transform::dzeta); }
  Field d2zeta(const Field& y) const { return map(y, &Transform::d2zeta); }
  Field d3zeta(const Field& y) const { return map(y, &Transform::d3zeta); }

 private:
  friend Transform make_transform(const DomainCase& c, const YRange& range);
  friend Transform make_transform_power_line(const DomainCase& c, const YRange& range);
  friend Transform make_transform_blend_half(const DomainCase& c, const YRange& range);

  Field map(const Field& y, double (Transform::*f)(double) const) const {
    Field out(y.size());
    for (Index i = 0; i < y.size(); ++i) out[i] = (this->*f)(y[i]);
    return out;
  }

  double zeta_cached(double y) const;
  void build_cache(double lo, double hi);

  DomainCase case_;
  YRange range_;
  Family family_ = Family::LineSinh;
  double p_ = 0.0;  // power exponent of the integrand for the integral families

  // zeta cache for the integral families: knots, values, exact slopes
  Field cache_y_, cache_z_, cache_m_;
};

/// Build the transform for the case. Dispatches on the interval kind and on
/// gamma (= 2 versus < 2). Rejects an empty or inverted y-range.
Transform make_transform(const DomainCase& c, const YRange& range);

/// gamma < 2 constructor paths; reject gamma == 2 (and vice versa above).
Transform make_transform_power_line(const DomainCase& c, const YRange& range);
Transform make_transform_blend_half(const DomainCase& c, const YRange& range);

}  // namespace qheat
