#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <type_traits>
#include <ostream>
#include <vector>

#include "errors.hpp"
#include "index_space.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "simplex_coords.hpp"
#include "sparse.hpp"
#include "univariate_jacobi.hpp"

namespace wfspec {

/// Product Jacobi basis on the (K-1)-simplex for mutation parameters theta
/// (length K), truncated at total degree D.
///
/// P_n(x) = prod_c R_{n_c}^{(theta_c, Theta_c + 2 N_c)}(xi_c) (1 - xi_c)^{N_c}
/// with N_c, Theta_c the sums of degrees and thetas strictly after c.
class MultiJacobiBasis {
 public:
  MultiJacobiBasis(std::vector<double> theta, int D)
      : theta_(std::move(theta)),
        enumeration_(std::make_shared<BasisEnumeration>(static_cast<int>(theta_.size()), D)) {
    for (double t : theta_)
      if (!(t > 0) || !std::isfinite(t)) throw ParameterDomainError("theta entries must be positive");
    theta_rest_.assign(theta_.size(), 0.0);
    for (std::size_t c = 0; c < theta_.size(); ++c) theta_rest_[c] = theta_tail_sum<double>(theta_, c + 1);
  }

  int K() const { return static_cast<int>(theta_.size()); }
  int dimension() const { return K() - 1; }
  int truncation() const { return enumeration_->truncation(); }
  const std::vector<double>& theta() const { return theta_; }
  /// sum_{i > c} theta_i
  double theta_rest(std::size_t c) const { return theta_rest_[c]; }
  const BasisEnumeration& enumeration() const { return *enumeration_; }
  std::shared_ptr<const BasisEnumeration> enumeration_ptr() const { return enumeration_; }

  /// Parameters of the factor along axis c when the later degrees sum to N.
  template <class Real = double>
  JacobiParams<Real> factor_params(std::size_t c, int N) const {
    if constexpr (std::is_same_v<Real, double>)
      return JacobiParams<Real>(theta_[c], theta_rest_[c] + 2 * N);
    else
      return JacobiParams<Real>(Real(theta_[c]), theta_tail_sum<Real>(theta_, c + 1) + Real(2 * N));
  }

  double log_norm(const IndexVector& n) const {
    check_length(n);
    double s = 0;
    for (std::size_t c = 0; c < n.size(); ++c) s += log_norm_c(n[c], factor_params(c, n.tail_sum(c + 1)));
    return s;
  }
  double norm(const IndexVector& n) const { return std::exp(log_norm(n)); }

  std::vector<double> log_norms() const {
    std::vector<double> out(enumeration_->size());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = log_norm((*enumeration_)[p]);
    return out;
  }

  /// C_n / C_0 for every enumerated n, in the working precision Real.
  template <class Real = double>
  std::vector<Real> relative_norms() const {
    std::vector<Real> out(enumeration_->size());
    for (std::size_t p = 0; p < out.size(); ++p) {
      const IndexVector& n = (*enumeration_)[p];
      Real r(1);
      for (std::size_t c = 0; c < n.size(); ++c) r *= norm_c_ratio(n[c], n.tail_sum(c + 1), factor_params<Real>(c, 0));
      out[p] = r;
    }
    return out;
  }

  void check_length(const IndexVector& n) const {
    if (static_cast<int>(n.size()) != dimension()) throw ParameterDomainError("index vector length != K-1");
  }

 private:
  std::vector<double> theta_;
  std::vector<double> theta_rest_;
  std::shared_ptr<BasisEnumeration> enumeration_;
};

inline double eval_P(const IndexVector& n, const MultiJacobiBasis& basis, const CubePoint& xi) {
  basis.check_length(n);
  double v = 1;
  for (std::size_t c = 0; c < n.size(); ++c) {
    const int N = n.tail_sum(c + 1);
    v *= eval_R(n[c], basis.factor_params(c, N), xi[c]);
    if (N > 0) v *= std::pow(1 - xi[c], N);
  }
  return v;
}

inline double eval_P(const IndexVector& n, const MultiJacobiBasis& basis, const SimplexPoint& x) {
  if (static_cast<int>(x.dim()) != basis.dimension()) throw ParameterDomainError("point dimension != K-1");
  return eval_P(n, basis, to_cube(x));
}

/// Evaluates every P_n with |n| <= level at one point, sharing the univariate
/// recurrences between basis elements.
class BasisEvaluator {
 public:
  BasisEvaluator(const MultiJacobiBasis& basis, int level)
      : basis_(basis), level_(level), enumeration_(basis.K(), level) {
    const std::size_t d = basis.dimension();
    tails_.resize(enumeration_.size() * d);
    for (std::size_t p = 0; p < enumeration_.size(); ++p)
      for (std::size_t c = 0; c < d; ++c) tails_[p * d + c] = enumeration_[p].tail_sum(c + 1);
  }

  int level() const { return level_; }
  std::size_t size() const { return enumeration_.size(); }
  const BasisEnumeration& enumeration() const { return enumeration_; }

  std::vector<double> operator()(const SimplexPoint& x) const {
    std::vector<double> out(size());
    eval(to_cube(x), out.data());
    return out;
  }

  void eval(const CubePoint& xi, double* out) const {
    const std::size_t d = basis_.dimension();
    const std::size_t L = level_;
    // table[c][N][k] = R_k^{(theta_c, Theta_c + 2N)}(xi_c) (1 - xi_c)^N
    std::vector<double> table(d * (L + 1) * (L + 1));
    auto at = [&](std::size_t c, std::size_t N, std::size_t k) -> double& {
      return table[(c * (L + 1) + N) * (L + 1) + k];
    };
    for (std::size_t c = 0; c < d; ++c) {
      // the last axis always has N = 0
      const std::size_t N_max = (c + 1 == d) ? 0 : L;
      double power = 1;
      for (std::size_t N = 0; N <= N_max; ++N) {
        double* row = &at(c, N, 0);
        eval_R_upto(static_cast<int>(L - N), basis_.factor_params(c, static_cast<int>(N)), xi[c], row);
        for (std::size_t k = 0; k <= L - N; ++k) row[k] *= power;
        power *= 1 - xi[c];
      }
    }
    for (std::size_t p = 0; p < enumeration_.size(); ++p) {
      const IndexVector& n = enumeration_[p];
      double v = 1;
      for (std::size_t c = 0; c < d; ++c) v *= at(c, tails_[p * d + c], n[c]);
      out[p] = v;
    }
  }

 private:
  MultiJacobiBasis basis_;
  int level_;
  BasisEnumeration enumeration_;
  std::vector<int> tails_;
};

namespace detail {

// Factor along axis c < i, chosen by d = N_c(n) - N_c(m).
template <class Real>
Real lower_factor(int d, int n_c, int m_c, const JacobiParams<Real>& p) {
  switch (d) {
    case -1: return connection_coefficient(ConnectionTable::H, n_c, m_c, p);
    case 0: return connection_coefficient(ConnectionTable::I, n_c, m_c, p);
    case 1: return connection_coefficient(ConnectionTable::J, n_c, m_c, p);
  }
  return Real(0);
}

template <class Real, class Emit>
void walk_lower(const MultiJacobiBasis& basis, const IndexVector& n, std::vector<int>& m, int c, int d,
                const Real& value, Emit& emit) {
  if (c < 0) {
    emit(m, value);
    return;
  }
  const int nc = n[c];
  const auto params = basis.factor_params<Real>(c, n.tail_sum(c + 1));
  // d = -1: m_c in {n_c-2, n_c-1, n_c}; d = 0: n_c +- 1; d = +1: {n_c, n_c+1, n_c+2}
  for (int mc = nc + d - 1; mc <= nc + d + 1; ++mc) {
    if (mc < 0) continue;
    const Real f = lower_factor(d, nc, mc, params);
    if (f == Real(0)) continue;
    m[c] = mc;
    walk_lower(basis, n, m, c - 1, d + nc - mc, Real(value * f), emit);
  }
  m[c] = nc;
}

}  // namespace detail

/// Calls emit(m, value) for every m with a nonzero entry (G_i)_{n,m}, where
/// x_i P_n = sum_m (G_i)_{n,m} P_m. Axis i is 0-based. No truncation is applied.
template <class Real, class Emit>
void for_each_recurrence_entry(const IndexVector& n, std::size_t i, const MultiJacobiBasis& basis, Emit&& emit) {
  basis.check_length(n);
  if (i >= n.size()) throw ParameterDomainError("recurrence axis out of range");
  std::vector<int> m = n.degrees();
  const int ni = n[i];
  const auto params = basis.factor_params<Real>(i, n.tail_sum(i + 1));
  for (int mi = ni - 1; mi <= ni + 1; ++mi) {
    if (mi < 0) continue;
    const Real g = connection_coefficient(ConnectionTable::G, ni, mi, params);
    if (g == Real(0)) continue;
    m[i] = mi;
    detail::walk_lower<Real>(basis, n, m, static_cast<int>(i) - 1, ni - mi, g, emit);
  }
}

/// Single entry (G_i)_{n,m}.
template <class Real = double>
Real recurrence_entry(const IndexVector& n, const IndexVector& m, std::size_t i, const MultiJacobiBasis& basis) {
  basis.check_length(m);
  Real out(0);
  for_each_recurrence_entry<Real>(n, i, basis, [&](const std::vector<int>& mm, const Real& v) {
    if (mm == m.degrees()) out = v;
  });
  return out;
}

/// Matrix of multiplication by x_i over all indices with |n| <= level, in
/// graded lexicographic order. Entries where |m| exceeds the level are dropped,
/// so only the block |n|, |m| <= level - 1 equals the infinite matrix exactly.
template <class Real = double>
struct RecurrenceMatrix {
  std::size_t axis = 0;
  std::shared_ptr<const BasisEnumeration> enumeration;
  SparseRows<Real> entries;

  void write_triplets(std::ostream& os) const { entries.write_triplets(os); }
};

template <class Real = double>
RecurrenceMatrix<Real> build_G(std::size_t i, const MultiJacobiBasis& basis, int pad) {
  if (pad < 0) throw ParameterDomainError("padding must be non-negative");
  if (static_cast<int>(i) >= basis.dimension()) throw ParameterDomainError("recurrence axis out of range");
  auto enumeration = std::make_shared<const BasisEnumeration>(basis.K(), basis.truncation() + pad);
  const std::size_t U = enumeration->size();
  RecurrenceMatrix<Real> G{i, enumeration, SparseRows<Real>(U, U)};
  parallel_for(U, [&](std::size_t row) {
    std::vector<std::pair<std::size_t, Real>> entries;
    for_each_recurrence_entry<Real>((*enumeration)[row], i, basis, [&](const std::vector<int>& m, const Real& v) {
      const std::size_t col = enumeration->find(m);
      if (col < U) entries.emplace_back(col, v);
    });
    G.entries.set_row(row, std::move(entries));
  });
  return G;
}

}  // namespace wfspec
