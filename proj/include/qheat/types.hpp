#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qheat {

using Field = Eigen::ArrayXd;
using Index = Eigen::Index;

/// Japanese bracket <x> = sqrt(x^2 + 1).
inline double bracket(double x) { return std::sqrt(x * x + 1.0); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Pairwise (cascade) summation; order-independent of chunking, reproducible.
inline double pairwise_sum(const double* data, Index n) {
  if (n <= 8) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const Index half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const Field& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace qheat
