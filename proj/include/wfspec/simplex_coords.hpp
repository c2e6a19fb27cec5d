#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace wfspec {

/// Coordinates within this distance outside the simplex are clamped back in.
inline constexpr double kSimplexTolerance = 1e-12;

/// Allele frequencies (x_1, ..., x_{K-1}); x_K = 1 - sum is implicit.
class SimplexPoint {
 public:
  SimplexPoint() = default;
  explicit SimplexPoint(std::vector<double> x) : x_(std::move(x)) {
    double sum = 0;
    for (double& v : x_) {
      if (!std::isfinite(v) || v < -kSimplexTolerance)
        throw ParameterDomainError("simplex coordinate out of range");
      if (v < 0) v = 0;
      sum += v;
    }
    if (sum > 1 + kSimplexTolerance) throw ParameterDomainError("simplex coordinates sum above 1");
    if (sum > 1) {
      for (double& v : x_) v /= sum;
      sum = 1;
    }
    last_ = std::max(0.0, 1 - sum);
  }

  /// Accepts either K-1 coordinates or all K frequencies (which must sum to 1).
  static SimplexPoint from_frequencies(std::vector<double> x, int K) {
    if (static_cast<int>(x.size()) == K) {
      double sum = 0;
      for (double v : x) sum += v;
      if (std::abs(sum - 1) > 1e-9) throw ParameterDomainError("frequencies must sum to 1");
      x.pop_back();
    }
    if (static_cast<int>(x.size()) != K - 1)
      throw ParameterDomainError("point has wrong number of coordinates");
    return SimplexPoint(std::move(x));
  }

  std::size_t dim() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  /// Frequency of allele i in 0..K-1, the last one being 1 - sum.
  double frequency(std::size_t i) const { return i < x_.size() ? x_[i] : last_; }
  double last() const { return last_; }
  const std::vector<double>& coords() const { return x_; }

  /// Smallest of the K frequencies.
  double boundary_distance() const {
    double d = last_;
    for (double v : x_) d = std::min(d, v);
    return d;
  }

 private:
  std::vector<double> x_;
  double last_ = 1;
};

/// Stick-breaking coordinates xi in [0,1]^{K-1}.
class CubePoint {
 public:
  CubePoint() = default;
  explicit CubePoint(std::vector<double> xi) : xi_(std::move(xi)) {
    for (double& v : xi_) {
      if (!std::isfinite(v) || v < -kSimplexTolerance || v > 1 + kSimplexTolerance)
        throw ParameterDomainError("cube coordinate out of range");
      v = std::min(1.0, std::max(0.0, v));
    }
  }
  std::size_t dim() const { return xi_.size(); }
  double operator[](std::size_t i) const { return xi_[i]; }
  const std::vector<double>& coords() const { return xi_; }

 private:
  std::vector<double> xi_;
};

/// xi_i = x_i / (1 - sum_{j<i} x_j). Where the remaining stick has length 0
/// the later xi are undefined; they are set to 0.
inline CubePoint to_cube(const SimplexPoint& x) {
  std::vector<double> xi(x.dim());
  double stick = 1;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    xi[i] = stick > 0 ? std::min(1.0, x[i] / stick) : 0.0;
    stick -= x[i];
    if (stick < 0) stick = 0;
  }
  return CubePoint(std::move(xi));
}

inline SimplexPoint from_cube(const CubePoint& xi) {
  std::vector<double> x(xi.dim());
  double stick = 1;
  for (std::size_t i = 0; i < xi.dim(); ++i) {
    x[i] = xi[i] * stick;
    stick *= 1 - xi[i];
  }
  return SimplexPoint(std::move(x));
}

/// |dx/dxi| = prod_{i=1}^{K-2} (1 - xi_i)^{K-i-1}.
inline double jacobian_det(const CubePoint& xi) {
  const std::size_t d = xi.dim();
  double J = 1;
  for (std::size_t c = 0; c + 1 < d; ++c) J *= std::pow(1 - xi[c], static_cast<double>(d - 1 - c));
  return J;
}

}  // namespace wfspec
