#include "qheat/transform.hpp"

#include <cmath>

#include "qheat/quadrature.hpp"
#include "qheat/smooth_bump.hpp"

namespace qheat {

namespace {

constexpr int kCacheIntervals = 8192;

double sech2(double y) {
  const double c = std::cosh(y);
  return 1.0 / (c * c);
}

// blended half-line integrand and its derivatives at a point
struct BlendPoint {
  double f, df, d2f;
  BlendPoint(double z, double p) {
    const SmoothCutoff psi(z);
    const double ez = std::exp(z);
    const double br = bracket(z);
    const double pw = std::pow(br, p);
    const double pw1 = p * z * std::pow(br, p - 2.0);
    const double pw2 = p * ((p - 1.0) * z * z + 1.0) * std::pow(br, p - 4.0);
    f = psi.value * ez + (1.0 - psi.value) * pw;
    df = psi.d1 * ez + psi.value * ez - psi.d1 * pw + (1.0 - psi.value) * pw1;
    d2f = psi.d2 * ez + 2.0 * psi.d1 * ez + psi.value * ez - psi.d2 * pw -
          2.0 * psi.d1 * pw1 + (1.0 - psi.value) * pw2;
  }
};

}  // namespace

double Transform::zeta(double y) const {
  const double L = case_.L;
  switch (family_) {
    case Family::IntervalTanh: return 0.5 * L * (std::tanh(y) + 1.0);
    case Family::LineSinh: return std::sinh(y);
    case Family::HalfExp: return std::exp(y);
    case Family::LinePower: return zeta_cached(y);
    case Family::HalfBlend:
      if (y <= -1.0) return std::exp(y);
      return zeta_cached(y);
  }
  return 0.0;
}

double Transform::dzeta(double y) const {
  const double L = case_.L;
  switch (family_) {
    case Family::IntervalTanh: return 0.5 * L * sech2(y);
    case Family::LineSinh: return std::cosh(y);
    case Family::HalfExp: return std::exp(y);
    case Family::LinePower: return std::pow(bracket(y), p_);
    case Family::HalfBlend:
      if (y <= -1.0) return std::exp(y);
      return BlendPoint(y, p_).f;
  }
  return 0.0;
}

double Transform::d2zeta(double y) const {
  const double L = case_.L;
  switch (family_) {
    case Family::IntervalTanh: return -L * sech2(y) * std::tanh(y);
    case Family::LineSinh: return std::sinh(y);
    case Family::HalfExp: return std::exp(y);
    case Family::LinePower: return p_ * y * std::pow(bracket(y), p_ - 2.0);
    case Family::HalfBlend:
      if (y <= -1.0) return std::exp(y);
      return BlendPoint(y, p_).df;
  }
  return 0.0;
}

double Transform::d3zeta(double y) const {
  const double L = case_.L;
  switch (family_) {
    case Family::IntervalTanh: {
      const double s2 = sech2(y), th = std::tanh(y);
      return L * s2 * (2.0 * th * th - s2);
    }
    case Family::LineSinh: return std::cosh(y);
    case Family::HalfExp: return std::exp(y);
    case Family::LinePower:
      return p_ * ((p_ - 1.0) * y * y + 1.0) * std::pow(bracket(y), p_ - 4.0);
    case Family::HalfBlend:
      if (y <= -1.0) return std::exp(y);
      return BlendPoint(y, p_).d2f;
  }
  return 0.0;
}

void Transform::build_cache(double lo, double hi) {
  const int n = kCacheIntervals + 1;
  cache_y_.resize(n);
  cache_z_.resize(n);
  cache_m_.resize(n);
  const double h = (hi - lo) / kCacheIntervals;
  auto integrand = [this](double z) { return dzeta(z); };

  for (int i = 0; i < n; ++i) {
    cache_y_[i] = lo + i * h;
    cache_m_[i] = dzeta(cache_y_[i]);
  }
  // cumulative integral, then anchored below
  cache_z_[0] = 0.0;
  for (int i = 1; i < n; ++i)
    cache_z_[i] = cache_z_[i - 1] + integrate(integrand, cache_y_[i - 1], cache_y_[i], 1e-14);

  double anchor = 0.0;
  if (family_ == Family::LinePower) {
    // zeta(0) = 0
    anchor = -integrate(integrand, lo, 0.0, 1e-13);
  } else {
    // zeta matches exp(y) at the left edge of the blend region
    anchor = std::exp(lo);
  }
  cache_z_ += anchor;
}

double Transform::zeta_cached(double y) const {
  const Index n = cache_y_.size();
  const double lo = cache_y_[0], hi = cache_y_[n - 1];
  auto hermite = [this](Index k, double y_) {
    const double h = cache_y_[k + 1] - cache_y_[k];
    const double t = (y_ - cache_y_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * cache_z_[k] + (t3 - 2.0 * t2 + t) * h * cache_m_[k] +
           (-2.0 * t3 + 3.0 * t2) * cache_z_[k + 1] + (t3 - t2) * h * cache_m_[k + 1];
  };
  if (y <= lo) {
    // linear continuation with the end slope; callers stay inside the box
    return cache_z_[0] + cache_m_[0] * (y - lo);
  }
  if (y >= hi) return cache_z_[n - 1] + cache_m_[n - 1] * (y - hi);
  const double h = (hi - lo) / (n - 1);
  Index k = static_cast<Index>((y - lo) / h);
  if (k >= n - 1) k = n - 2;
  return hermite(k, y);
}

Transform make_transform(const DomainCase& c, const YRange& range) {
  require(range.y_min < range.y_max, "make_transform: empty y_range");
  switch (c.kind) {
    case IntervalKind::BoundedInterval: {
      Transform t;
      t.case_ = c;
      t.range_ = range;
      t.family_ = Transform::Family::IntervalTanh;
      return t;
    }
    case IntervalKind::WholeLine: {
      if (c.gamma == 2.0) {
        Transform t;
        t.case_ = c;
        t.range_ = range;
        t.family_ = Transform::Family::LineSinh;
        return t;
      }
      return make_transform_power_line(c, range);
    }
    case IntervalKind::HalfLine: {
      if (c.gamma == 2.0) {
        Transform t;
        t.case_ = c;
        t.range_ = range;
        t.family_ = Transform::Family::HalfExp;
        return t;
      }
      return make_transform_blend_half(c, range);
    }
  }
  throw std::invalid_argument("make_transform: unknown case kind");
}

Transform make_transform_power_line(const DomainCase& c, const YRange& range) {
  require(range.y_min < range.y_max, "make_transform: empty y_range");
  require(c.kind == IntervalKind::WholeLine, "power-line transform requires the whole line");
  require(c.gamma < 2.0, "power-line transform requires gamma < 2");
  require(range.y_min < 0.0 && range.y_max > 0.0, "whole-line y_range must straddle 0");
  Transform t;
  t.case_ = c;
  t.range_ = range;
  t.family_ = Transform::Family::LinePower;
  t.p_ = c.gamma / (2.0 - c.gamma);
  t.build_cache(range.y_min, range.y_max);
  return t;
}

Transform make_transform_blend_half(const DomainCase& c, const YRange& range) {
  require(range.y_min < range.y_max, "make_transform: empty y_range");
  require(c.kind == IntervalKind::HalfLine, "blended transform requires the half-line");
  require(c.gamma < 2.0, "blended transform requires gamma < 2");
  Transform t;
  t.case_ = c;
  t.range_ = range;
  t.family_ = Transform::Family::HalfBlend;
  t.p_ = c.gamma / (2.0 - c.gamma);
  // exp(y) is exact below -1; cache only the blended part
  t.build_cache(-1.0, std::max(range.y_max, -0.5));
  return t;
}

}  // namespace qheat
