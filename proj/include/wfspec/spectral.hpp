#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "extended_eigen.hpp"
#include "index_space.hpp"
#include "model.hpp"
#include "multivariate_jacobi.hpp"
#include "sparse.hpp"

namespace wfspec {

enum class PrecisionMode { automatic, double_precision, extended };

struct AssemblyOptions {
  int pad = 4;
  PrecisionMode precision = PrecisionMode::automatic;
  unsigned extended_bits = 128;       // 128 or 256
  double extended_threshold = 50;     // automatic mode switches when max|sigma| exceeds this
};

/// Breaks the detailed-balance symmetry that symmetrize() relies on.
class DetailedBalanceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

template <class Real>
struct ExtendedOperator {
  SparseRows<Real> M;
  std::vector<Real> relative_norms;  // C_n / C_0
};

/// Truncated operator M^[D] over the graded-lex basis with |n| <= D, acting on
/// coefficient row vectors: u M = Lambda u for left eigenvectors.
/// In extended mode the working-precision matrix is kept alongside the rounded
/// copy M, and the eigensolve runs in that precision.
struct OperatorMatrix {
  ModelParams model;
  int truncation = 0;
  std::shared_ptr<const BasisEnumeration> enumeration;
  SparseRows<double> M;
  std::vector<double> log_norms;  // log C_n
  bool extended = false;
  unsigned bits = 53;
  std::variant<std::monostate, ExtendedOperator<ExtendedReal<128>>, ExtendedOperator<ExtendedReal<256>>> working;

  std::size_t size() const { return M.rows(); }
  double scaling(std::size_t n) const { return std::exp(0.5 * log_norms[n]); }
};

namespace detail {

template <class Real>
SparseRows<Real> selection_part(const ModelParams& p, const MultiJacobiBasis& basis, int pad) {
  const int d = p.dimension();
  std::vector<SparseRows<Real>> G;
  for (int i = 0; i < d; ++i) G.push_back(build_G<Real>(i, basis, pad).entries);
  const std::size_t U = G.empty() ? 0 : G[0].rows();

  // The G_i commute, so ordered tuples collapse onto sorted multisets.
  const auto q = q_coefficients<Real>(p);
  std::map<std::vector<int>, Real> merged;
  for (int L = 0; L <= 4; ++L)
    for (std::size_t f = 0; f < q.by_order[L].size(); ++f) {
      auto t = q.tuple(L, f);
      std::sort(t.begin(), t.end());
      auto it = merged.find(t);
      if (it == merged.end())
        merged.emplace(std::move(t), q.by_order[L][f]);
      else
        it->second += q.by_order[L][f];
    }

  // prefix products over sorted tuples; std::map iterates prefixes first
  std::map<std::vector<int>, SparseRows<Real>> products;
  products.emplace(std::vector<int>{}, SparseRows<Real>::identity(U));
  SparseRows<Real> out(U, U);
  for (const auto& [t, coef] : merged) {
    if (!t.empty() && products.find(t) == products.end()) {
      std::vector<int> prefix(t.begin(), t.end() - 1);
      products.emplace(t, products.at(prefix) * G[t.back()]);
    }
    if (coef != Real(0)) out.add_scaled(products.at(t), coef);
  }
  return out;
}

template <class Real>
SparseRows<Real> assemble_in(const ModelParams& p, const MultiJacobiBasis& basis, int pad) {
  const std::size_t U = basis.enumeration().size();
  SparseRows<Real> M(U, U);
  if (!p.is_neutral()) M = selection_part<Real>(p, basis, pad).leading_block(U);
  const Real ts = theta_tail_sum<Real>(p.theta(), 0);
  for (std::size_t n = 0; n < U; ++n) {
    const int l = basis.enumeration()[n].total();
    M.add_diagonal(n, Real(0.5) * Real(l) * (Real(l - 1) + ts));
  }
  return M;
}

template <unsigned Bits>
void assemble_extended(OperatorMatrix& om, const MultiJacobiBasis& basis, int pad) {
  using Real = ExtendedReal<Bits>;
  ExtendedOperator<Real> ext{assemble_in<Real>(om.model, basis, pad), basis.relative_norms<Real>()};
  om.M = ext.M.template cast<double>();
  om.bits = Bits;
  om.working = std::move(ext);
}

template <class Real>
using DenseMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

// S_km = M_km sqrt(r_m / r_k) for any positive rescaling r of the norms.
template <class Real>
DenseMatrix<Real> symmetrize_with(const SparseRows<Real>& M, const std::vector<Real>& scale_sq, double tolerance) {
  using std::abs;
  using std::sqrt;
  const std::size_t U = M.rows();
  std::vector<Real> s(U);
  for (std::size_t k = 0; k < U; ++k) s[k] = sqrt(scale_sq[k]);
  DenseMatrix<Real> S = DenseMatrix<Real>::Zero(U, U);
  for (std::size_t k = 0; k < U; ++k)
    for (const auto& [m, v] : M.row(k)) S(k, m) = v * s[m] / s[k];
  Real scale(0), defect(0);
  for (std::size_t k = 0; k < U; ++k)
    for (std::size_t m = 0; m < U; ++m) {
      scale = std::max(scale, Real(abs(S(k, m))));
      if (m > k) defect = std::max(defect, Real(abs(S(k, m) - S(m, k))));
    }
  if (defect > Real(tolerance) * scale)
    throw DetailedBalanceError("operator matrix violates detailed balance: defect " +
                               std::to_string(static_cast<double>(defect)) + " vs scale " +
                               std::to_string(static_cast<double>(scale)));
  DenseMatrix<Real> sym = (S + S.transpose()) * Real(0.5);
  return sym;
}

}  // namespace detail

inline bool uses_extended_precision(const ModelParams& p, const AssemblyOptions& opt) {
  switch (opt.precision) {
    case PrecisionMode::double_precision: return false;
    case PrecisionMode::extended: return true;
    case PrecisionMode::automatic: return p.max_abs_sigma() > opt.extended_threshold;
  }
  return false;
}

/// M^[D] = diag(lambda_|m|) + sum_i q(i) G_{i_1} ... G_{i_L}, leading U(D) block.
/// The G_i are built at level D + pad. A degree-4 product between indices with
/// |n|, |m| <= D only passes through degree <= D + 2, so pad >= 2 keeps the block exact.
inline OperatorMatrix assemble_M(const ModelParams& p, int D, const AssemblyOptions& opt = {}) {
  if (D < 0) throw ParameterDomainError("truncation level must be non-negative");
  if (opt.pad < 2) throw ParameterDomainError("padding must be at least 2");
  MultiJacobiBasis basis(p.theta(), D);
  OperatorMatrix om;
  om.model = p;
  om.truncation = D;
  om.enumeration = basis.enumeration_ptr();
  om.log_norms = basis.log_norms();
  om.extended = uses_extended_precision(p, opt);
  if (!om.extended) {
    om.M = detail::assemble_in<double>(p, basis, opt.pad);
  } else if (opt.extended_bits == 128) {
    detail::assemble_extended<128>(om, basis, opt.pad);
  } else if (opt.extended_bits == 256) {
    detail::assemble_extended<256>(om, basis, opt.pad);
  } else {
    throw ConfigError("extended precision supports 128 or 256 bits");
  }
  return om;
}

/// Largest |M_km C_m - M_mk C_k| / max(|M_km C_m|, |M_mk C_k|) over stored entries.
inline double detailed_balance_defect(const OperatorMatrix& om) {
  double worst = 0;
  for (std::size_t k = 0; k < om.size(); ++k)
    for (const auto& [m, v] : om.M.row(k)) {
      if (m == k) continue;
      const double lhs = v * std::exp(om.log_norms[m] - om.log_norms[k]);
      const double rhs = om.M.get(m, k);
      const double scale = std::max(std::abs(lhs), std::abs(rhs));
      if (scale > 0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  return worst;
}

/// S = diag(1/s) M diag(s), s_n = sqrt(C_n), from the rounded matrix. Throws if
/// S is not symmetric to tolerance * max|S|; otherwise returns (S + S^T) / 2.
inline Eigen::MatrixXd symmetrize(const OperatorMatrix& om, double tolerance = 1e-9) {
  std::vector<double> r(om.size());
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = std::exp(om.log_norms[n] - om.log_norms[0]);
  return detail::symmetrize_with(om.M, r, tolerance);
}

/// Eigenvalues Lambda_n (ascending) and left eigenvectors u_n (rows) with
/// sum_m u_nm^2 C_m = 1; the largest-magnitude entry of each u_n is positive.
struct SpectralDecomposition {
  ModelParams model;
  int truncation = 0;
  std::shared_ptr<const BasisEnumeration> enumeration;
  std::vector<double> log_norms;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd coefficients;  // (n, m)
  bool extended = false;
  unsigned bits = 53;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  MultiJacobiBasis basis() const { return MultiJacobiBasis(model.theta(), truncation); }

  /// sum_m u_nm^2 C_m over |m| <= m_max.
  double norm(std::size_t n, int m_max) const {
    const std::size_t cols = std::min<std::size_t>(enumeration->degree_begin(m_max + 1), size());
    double s = 0;
    for (std::size_t m = 0; m < cols; ++m) s += coefficients(n, m) * coefficients(n, m) * std::exp(log_norms[m]);
    return s;
  }
};

namespace detail {

template <class Real>
void solve_into(SpectralDecomposition& sd, const SparseRows<Real>& M, const std::vector<Real>& scale_sq,
                double tolerance) {
  const DenseMatrix<Real> S = symmetrize_with(M, scale_sq, tolerance);
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Real>> solver(S);
  if (solver.info() != Eigen::Success)
    throw NumericalError("symmetric eigensolver did not converge at D = " + std::to_string(sd.truncation));
  const std::size_t U = M.rows();
  sd.eigenvalues.resize(U);
  sd.coefficients.resize(U, U);
  for (std::size_t n = 0; n < U; ++n) {
    sd.eigenvalues(n) = static_cast<double>(solver.eigenvalues()(n));
    Eigen::Index arg = 0;
    double best = -1;
    for (std::size_t m = 0; m < U; ++m) {
      // scale_sq is C_m up to the constant C_0
      const double u = static_cast<double>(solver.eigenvectors()(m, n)) * std::exp(-0.5 * sd.log_norms[m]);
      sd.coefficients(n, m) = u;
      if (std::abs(u) > best) {
        best = std::abs(u);
        arg = m;
      }
    }
    if (sd.coefficients(n, arg) < 0) sd.coefficients.row(n) *= -1;
  }
}

}  // namespace detail

inline SpectralDecomposition eigensolve(const OperatorMatrix& om, double tolerance = 1e-9) {
  SpectralDecomposition sd;
  sd.model = om.model;
  sd.truncation = om.truncation;
  sd.enumeration = om.enumeration;
  sd.log_norms = om.log_norms;
  sd.extended = om.extended;
  sd.bits = om.bits;
  if (const auto* e = std::get_if<ExtendedOperator<ExtendedReal<128>>>(&om.working)) {
    detail::solve_into(sd, e->M, e->relative_norms, tolerance);
  } else if (const auto* e = std::get_if<ExtendedOperator<ExtendedReal<256>>>(&om.working)) {
    detail::solve_into(sd, e->M, e->relative_norms, tolerance);
  } else {
    std::vector<double> r(om.size());
    for (std::size_t n = 0; n < r.size(); ++n) r[n] = std::exp(om.log_norms[n] - om.log_norms[0]);
    detail::solve_into(sd, om.M, r, tolerance);
  }
  return sd;
}

inline SpectralDecomposition decompose(const ModelParams& p, int D, const AssemblyOptions& opt = {}) {
  return eigensolve(assemble_M(p, D, opt));
}

/// w_n(x) = sum_{|m| <= m_max} u_nm P_m(x) for n < n_count, sharing one basis evaluation.
inline std::vector<double> mode_values(const SpectralDecomposition& sd, const SimplexPoint& x, std::size_t n_count,
                                       int m_max) {
  check_point(sd.model, x);
  if (m_max < 0 || m_max > sd.truncation) throw ParameterDomainError("m_max must lie in [0, D]");
  n_count = std::min(n_count, sd.size());
  const BasisEvaluator eval(sd.basis(), m_max);
  const std::vector<double> P = eval(x);
  std::vector<double> w(n_count);
  const Eigen::Map<const Eigen::VectorXd> Pv(P.data(), P.size());
  Eigen::Map<Eigen::VectorXd> wv(w.data(), w.size());
  wv.noalias() = sd.coefficients.topLeftCorner(n_count, P.size()) * Pv;
  return w;
}

/// B_n(x) = e^{-sigma-bar(x)/2} sum_{|m| <= m_max} u_nm P_m(x).
inline double eval_B(std::size_t n, const SpectralDecomposition& sd, const SimplexPoint& x, int m_max = -1) {
  if (n >= sd.size()) throw ParameterDomainError("eigenfunction index beyond U(D)");
  if (m_max < 0) m_max = sd.truncation;
  const auto w = mode_values(sd, x, n + 1, m_max);
  return std::exp(-0.5 * mean_fitness(sd.model, x)) * w[n];
}

struct ConvergenceRow {
  int D;
  std::size_t n;
  double Lambda;
  std::vector<std::pair<IndexVector, double>> u;  // selected u_{n,m}; m with |m| > D omitted
};

/// Lambda_n^[D] and selected u_{n,m}^[D] for every D in D_list, matched across
/// D by sorted position. Rows with n >= U(D) are omitted.
inline std::vector<ConvergenceRow> convergence_table(const ModelParams& p, const std::vector<std::size_t>& n_list,
                                                     const std::vector<int>& D_list,
                                                     const std::vector<IndexVector>& m_list,
                                                     const AssemblyOptions& opt = {}) {
  std::vector<ConvergenceRow> rows;
  for (int D : D_list) {
    const auto sd = decompose(p, D, opt);
    for (std::size_t n : n_list) {
      if (n >= sd.size()) continue;
      ConvergenceRow row{D, n, sd.eigenvalues(n), {}};
      for (const auto& m : m_list) {
        const std::size_t pos = sd.enumeration->find(m.degrees());
        if (pos < sd.size()) row.u.emplace_back(m, sd.coefficients(n, pos));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace wfspec
