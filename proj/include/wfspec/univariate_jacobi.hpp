#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace wfspec {

/// Shifted Jacobi family R_n^{(a,b)} on [0,1], orthogonal w.r.t. x^{a-1}(1-x)^{b-1}.
template <class Real>
struct JacobiParams {
  Real a;
  Real b;

  JacobiParams(Real a_, Real b_) : a(a_), b(b_) {
    if (!(a > 0) || !(b > 0))
      throw ParameterDomainError("Jacobi parameters must be positive");
  }
};

/// Three-term recurrence x R_n = A_n R_{n-1} + B_n R_n + C_n R_{n+1}.
/// The n = 0 cases are written out so a+b = 1 or 2 never divides 0/0.
template <class Real>
Real recurrence_A(int n, const JacobiParams<Real>& p) {
  if (n <= 0) return Real(0);
  const Real s = Real(2 * n) + p.a + p.b;
  return (Real(n) + p.a - 1) * (Real(n) + p.b - 1) / ((s - 1) * (s - 2));
}

template <class Real>
Real recurrence_B(int n, const JacobiParams<Real>& p) {
  if (n == 0) return p.a / (p.a + p.b);
  const Real s = Real(2 * n) + p.a + p.b;
  return Real(0.5) - (p.b - p.a) * (p.a + p.b - 2) / (Real(2) * s * (s - 2));
}

template <class Real>
Real recurrence_C(int n, const JacobiParams<Real>& p) {
  if (n == 0) return Real(1) / (p.a + p.b);
  const Real s = Real(2 * n) + p.a + p.b;
  return (Real(n) + 1) * (Real(n) + p.a + p.b - 1) / (s * (s - 1));
}

/// Fills out[0..n_max] with R_0(x), ..., R_{n_max}(x).
template <class Real>
void eval_R_upto(int n_max, const JacobiParams<Real>& p, Real x, Real* out) {
  if (n_max < 0) return;
  out[0] = Real(1);
  if (n_max == 0) return;
  out[1] = (p.a + p.b) * x - p.a;
  for (int n = 1; n < n_max; ++n)
    out[n + 1] = ((x - recurrence_B(n, p)) * out[n] - recurrence_A(n, p) * out[n - 1]) /
                 recurrence_C(n, p);
}

template <class Real>
std::vector<Real> eval_R_upto(int n_max, const JacobiParams<Real>& p, Real x) {
  if (n_max < 0) throw ParameterDomainError("negative polynomial degree");
  std::vector<Real> out(n_max + 1);
  eval_R_upto(n_max, p, x, out.data());
  return out;
}

template <class Real>
Real eval_R(int n, const JacobiParams<Real>& p, Real x) {
  if (n < 0) throw ParameterDomainError("negative polynomial degree");
  return eval_R_upto(n, p, x).back();
}

/// log of c_n = int_0^1 R_n^2 x^{a-1}(1-x)^{b-1} dx.
inline double log_norm_c(int n, const JacobiParams<double>& p) {
  if (n < 0) throw ParameterDomainError("negative polynomial degree");
  const double a = p.a, b = p.b, dn = n;
  if (n == 0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::lgamma(dn + a) + std::lgamma(dn + b) - std::lgamma(dn + a + b) -
         std::lgamma(dn + 1) + std::log((dn + a + b - 1) / (2 * dn + a + b - 1));
}

inline double norm_c(int n, const JacobiParams<double>& p) { return std::exp(log_norm_c(n, p)); }

/// c_n^{(a, b+2N)} / c_0^{(a, b)} from rational recurrences only, so it can be
/// evaluated in any working precision without gamma functions.
template <class Real>
Real norm_c_ratio(int n, int N, const JacobiParams<Real>& base) {
  if (n < 0 || N < 0) throw ParameterDomainError("negative polynomial degree");
  const Real a = base.a, b = base.b;
  Real r(1);
  for (int j = 0; j < 2 * N; ++j) r *= (b + Real(j)) / (a + b + Real(j));
  const Real bp = b + Real(2 * N);
  if (n >= 1) r *= a * bp / (a + bp + 1);
  for (int k = 2; k <= n; ++k) {
    const Real dk = Real(k);
    r *= (dk - 1 + a) * (dk - 1 + bp) * (Real(2) * dk + a + bp - 3) /
         ((Real(2) * dk + a + bp - 1) * (dk + a + bp - 2) * dk);
  }
  return r;
}

/// Connection tables between neighbouring Jacobi families:
///   G: x R_n^{(a,b)}         = sum_m G_{n,m} R_m^{(a,b)}     m in {n-1, n, n+1}
///   H: R_n^{(a,b)}           = sum_m H_{n,m} R_m^{(a,b+2)}   m in {n-2, n-1, n}
///   I: (1-x) R_n^{(a,b)}     = sum_m I_{n,m} R_m^{(a,b)}     m in {n-1, n, n+1}
///   J: (1-x)^2 R_n^{(a,b)}   = sum_m J_{n,m} R_m^{(a,b-2)}   m in {n, n+1, n+2}, b > 2
enum class ConnectionTable { G, H, I, J };

template <class Real>
Real connection_coefficient(ConnectionTable table, int n, int m, const JacobiParams<Real>& p) {
  if (n < 0 || m < 0) throw ParameterDomainError("negative polynomial degree");
  const Real a = p.a, b = p.b;
  const Real s = Real(2 * n) + a + b;
  const Real dn = Real(n);
  switch (table) {
    case ConnectionTable::G:
      if (m == n - 1) return recurrence_A(n, p);
      if (m == n) return recurrence_B(n, p);
      if (m == n + 1) return recurrence_C(n, p);
      return Real(0);
    case ConnectionTable::I:
      if (m == n - 1) return -recurrence_A(n, p);
      if (m == n) return Real(1) - recurrence_B(n, p);
      if (m == n + 1) return -recurrence_C(n, p);
      return Real(0);
    case ConnectionTable::H:
      if (m == n) {
        if (n == 0) return Real(1);
        return (dn + a + b - 1) * (dn + a + b) / ((s - 1) * s);
      }
      if (m == n - 1) {
        if (n == 1) return Real(-2) * a / (a + b + 2);
        return Real(-2) * (dn + a - 1) * (dn + a + b - 1) / ((s - 2) * s);
      }
      if (m == n - 2) return (dn + a - 2) * (dn + a - 1) / ((s - 2) * (s - 1));
      return Real(0);
    case ConnectionTable::J:
      if (!(b > 2)) throw ParameterDomainError("J table requires b > 2");
      if (m == n) return (dn + b - 2) * (dn + b - 1) / ((s - 2) * (s - 1));
      if (m == n + 1) return Real(-2) * (dn + 1) * (dn + b - 1) / ((s - 2) * s);
      if (m == n + 2) return (dn + 1) * (dn + 2) / ((s - 1) * s);
      return Real(0);
  }
  return Real(0);
}

template <class Real>
Real coeff_G(int n, int m, const JacobiParams<Real>& p) { return connection_coefficient(ConnectionTable::G, n, m, p); }
template <class Real>
Real coeff_H(int n, int m, const JacobiParams<Real>& p) { return connection_coefficient(ConnectionTable::H, n, m, p); }
template <class Real>
Real coeff_I(int n, int m, const JacobiParams<Real>& p) { return connection_coefficient(ConnectionTable::I, n, m, p); }
template <class Real>
Real coeff_J(int n, int m, const JacobiParams<Real>& p) { return connection_coefficient(ConnectionTable::J, n, m, p); }

/// Coefficients (alpha, beta) with R_n^{(a,b)} = alpha R_n^{(a,b+1)} + beta R_{n-1}^{(a,b+1)}.
template <class Real>
std::pair<Real, Real> raise_b(int n, const JacobiParams<Real>& p) {
  if (n < 0) throw ParameterDomainError("negative polynomial degree");
  if (n == 0) return {Real(1), Real(0)};
  const Real s = Real(2 * n) + p.a + p.b;
  return {(Real(n) + p.a + p.b - 1) / (s - 1), -(Real(n) + p.a - 1) / (s - 1)};
}

}  // namespace wfspec
