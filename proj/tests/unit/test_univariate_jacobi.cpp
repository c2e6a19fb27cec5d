#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <wfspec/oracles.hpp>
#include <wfspec/univariate_jacobi.hpp>

using namespace wfspec;

namespace {

// int_0^1 f(x) x^{a-1}(1-x)^{b-1} dx on GSL Gauss-Jacobi nodes
template <class F>
double jacobi_integral(double a, double b, F f, int n = 60) {
  const auto rule = gauss_jacobi_rule(n, a, b);
  double s = 0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(rule.nodes[k]);
  return s;
}

const std::vector<std::pair<double, double>> kParams{{0.01, 0.05}, {0.5, 0.5}, {1, 1}, {2.3, 0.7}, {0.03, 40.05}};

}  // namespace

TEST(Univariate, LowDegreeClosedForms) {
  const JacobiParams<double> p(0.7, 1.9);
  EXPECT_DOUBLE_EQ(eval_R(0, p, 0.3), 1.0);
  EXPECT_NEAR(eval_R(1, p, 0.3), (0.7 + 1.9) * 0.3 - 0.7, 1e-15);
}

TEST(Univariate, OrthogonalityAndNormAgainstQuadrature) {
  for (auto [a, b] : kParams) {
    const JacobiParams<double> p(a, b);
    for (int n = 0; n <= 8; ++n)
      for (int m = 0; m <= 8; ++m) {
        const double g = jacobi_integral(a, b, [&](double x) { return eval_R(n, p, x) * eval_R(m, p, x); });
        const double c = std::sqrt(norm_c(n, p) * norm_c(m, p));
        EXPECT_NEAR(g / c, n == m ? 1.0 : 0.0, 1e-10) << "a=" << a << " b=" << b << " n=" << n << " m=" << m;
      }
  }
}

TEST(Univariate, ThreeTermRecurrenceHolds) {
  const JacobiParams<double> p(0.3, 2.2);
  for (double x : {0.0, 0.17, 0.5, 0.93, 1.0}) {
    const auto R = eval_R_upto(10, p, x);
    for (int n = 1; n < 10; ++n) {
      const double rhs = recurrence_A(n, p) * R[n - 1] + recurrence_B(n, p) * R[n] + recurrence_C(n, p) * R[n + 1];
      EXPECT_NEAR(x * R[n], rhs, 1e-12 * (1 + std::abs(R[n])));
    }
  }
}

TEST(Univariate, ValueAtZero) {
  // R_n(0) = (-1)^n (a)_n / n!. At the x = 0 endpoint with small a the recurrence
  // loses about n^2 eps / a, the same in every precision, so the formula is held to
  // long double and the double path to that conditioning bound.
  const JacobiParams<long double> pl(0.02L, 0.04L);
  const JacobiParams<double> pd(0.02, 0.04);
  long double want = 1;
  for (int n = 0; n <= 12; ++n) {
    if (n > 0) want *= -(n - 1 + 0.02L) / n;
    EXPECT_NEAR(static_cast<double>(eval_R<long double>(n, pl, 0.0L) / want), 1.0, 1e-14);
    const double cond = 20 * (n + 1) * (n + 1) * std::numeric_limits<double>::epsilon() / 0.02;
    EXPECT_NEAR(eval_R(n, pd, 0.0) / static_cast<double>(want), 1.0, cond);
  }
}

TEST(Univariate, NormRatioMatchesLgamma) {
  const JacobiParams<double> base(0.01, 0.05);
  for (int N = 0; N <= 6; ++N)
    for (int n = 0; n <= 10; ++n) {
      const double direct = std::exp(log_norm_c(n, JacobiParams<double>(0.01, 0.05 + 2 * N)) - log_norm_c(0, base));
      EXPECT_NEAR(norm_c_ratio(n, N, base) / direct, 1.0, 1e-12);
    }
}

// Each connection table is checked by projecting onto the target family with quadrature.
TEST(Univariate, ConnectionTablesByProjection) {
  for (auto [a, b] : kParams) {
    if (b <= 2) b += 2;  // J needs b > 2
    const JacobiParams<double> p(a, b), up(a, b + 2), down(a, b - 2);
    for (int n = 0; n <= 6; ++n)
      for (int m = 0; m <= 8; ++m) {
        auto proj = [&](const JacobiParams<double>& target, auto f) {
          return jacobi_integral(target.a, target.b,
                                 [&](double x) { return f(x) * eval_R(m, target, x); }) / norm_c(m, target);
        };
        const double G = proj(p, [&](double x) { return x * eval_R(n, p, x); });
        const double I = proj(p, [&](double x) { return (1 - x) * eval_R(n, p, x); });
        const double H = proj(up, [&](double x) { return eval_R(n, p, x); });
        const double J = proj(down, [&](double x) { return (1 - x) * (1 - x) * eval_R(n, p, x); });
        EXPECT_NEAR(coeff_G(n, m, p), G, 1e-10);
        EXPECT_NEAR(coeff_I(n, m, p), I, 1e-10);
        EXPECT_NEAR(coeff_H(n, m, p), H, 1e-10);
        EXPECT_NEAR(coeff_J(n, m, p), J, 1e-10);
      }
  }
}

TEST(Univariate, RaiseB) {
  const JacobiParams<double> p(0.4, 1.3), up(0.4, 2.3);
  for (int n = 0; n <= 8; ++n) {
    const auto [alpha, beta] = raise_b(n, p);
    for (double x : {0.1, 0.45, 0.8}) {
      const double rhs = alpha * eval_R(n, up, x) + (n ? beta * eval_R(n - 1, up, x) : 0.0);
      EXPECT_NEAR(eval_R(n, p, x), rhs, 1e-12);
    }
  }
}

TEST(Univariate, Errors) {
  EXPECT_THROW(JacobiParams<double>(0.0, 1.0), ParameterDomainError);
  EXPECT_THROW(JacobiParams<double>(1.0, -2.0), ParameterDomainError);
  EXPECT_THROW(eval_R(-1, JacobiParams<double>(1, 1), 0.5), ParameterDomainError);
  EXPECT_THROW(coeff_J(1, 1, JacobiParams<double>(1, 1.5)), ParameterDomainError);
}
