#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "simplex_coords.hpp"

namespace wfspec {

inline constexpr double kSigmaTolerance = 1e-12;

/// sum_{i >= from} theta_i in the working precision, accumulated from the last
/// entry down so every caller rounds identically.
template <class Real>
Real theta_tail_sum(const std::vector<double>& theta, std::size_t from) {
  Real s(0);
  for (std::size_t i = theta.size(); i-- > from;) s += Real(theta[i]);
  return s;
}

/// K-allele model: mutation parameters theta (length K, all > 0) and the
/// symmetric selection matrix sigma (K x K, sigma_KK = 0). Allele K-1 (0-based)
/// is the reference allele whose frequency is implicit.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(std::vector<double> theta, std::vector<std::vector<double>> sigma)
      : theta_(std::move(theta)) {
    K_ = static_cast<int>(theta_.size());
    if (K_ < 2) throw ConfigError("model needs K >= 2 alleles");
    for (double t : theta_)
      if (!std::isfinite(t) || !(t > 0)) throw ConfigError("theta entries must be positive and finite");
    if (static_cast<int>(sigma.size()) != K_) throw ConfigError("sigma must be K x K");
    sigma_.assign(K_ * K_, 0.0);
    for (int i = 0; i < K_; ++i) {
      if (static_cast<int>(sigma[i].size()) != K_) throw ConfigError("sigma must be K x K");
      for (int j = 0; j < K_; ++j) {
        if (!std::isfinite(sigma[i][j])) throw ConfigError("sigma entries must be finite");
        sigma_[i * K_ + j] = sigma[i][j];
      }
    }
    for (int i = 0; i < K_; ++i)
      for (int j = 0; j < i; ++j)
        if (std::abs(sigma_[i * K_ + j] - sigma_[j * K_ + i]) > kSigmaTolerance)
          throw ConfigError("sigma must be symmetric");
    if (std::abs(sigma_[K_ * K_ - 1]) > kSigmaTolerance) throw ConfigError("sigma_KK must be 0");
    // symmetrize exactly so downstream code can rely on it
    for (int i = 0; i < K_; ++i)
      for (int j = 0; j < i; ++j) sigma_[j * K_ + i] = sigma_[i * K_ + j];
    sigma_[K_ * K_ - 1] = 0;
  }

  /// Neutral model.
  static ModelParams neutral(std::vector<double> theta) {
    const std::size_t K = theta.size();
    return ModelParams(std::move(theta), std::vector<std::vector<double>>(K, std::vector<double>(K, 0.0)));
  }

  int K() const { return K_; }
  int dimension() const { return K_ - 1; }
  const std::vector<double>& theta() const { return theta_; }
  double theta_sum() const { return theta_tail_sum<double>(theta_, 0); }
  double sigma(int i, int j) const { return sigma_[i * K_ + j]; }
  std::vector<std::vector<double>> sigma_matrix() const {
    std::vector<std::vector<double>> out(K_, std::vector<double>(K_));
    for (int i = 0; i < K_; ++i)
      for (int j = 0; j < K_; ++j) out[i][j] = sigma(i, j);
    return out;
  }
  double max_abs_sigma() const {
    double m = 0;
    for (double s : sigma_) m = std::max(m, std::abs(s));
    return m;
  }
  bool is_neutral() const { return max_abs_sigma() == 0; }

  /// Same theta, sigma multiplied by f.
  ModelParams scaled_selection(double f) const {
    auto s = sigma_matrix();
    for (auto& row : s)
      for (double& v : row) v *= f;
    return ModelParams(theta_, s);
  }

 private:
  int K_ = 0;
  std::vector<double> theta_;
  std::vector<double> sigma_;
};

inline void check_point(const ModelParams& p, const SimplexPoint& x) {
  if (static_cast<int>(x.dim()) != p.dimension()) throw ParameterDomainError("point dimension != K-1");
}

/// sigma_i(x) = sum_j sigma_ij x_j over all K alleles.
inline double marginal_fitness(const ModelParams& p, int i, const SimplexPoint& x) {
  check_point(p, x);
  double s = 0;
  for (int j = 0; j < p.K(); ++j) s += p.sigma(i, j) * x.frequency(j);
  return s;
}

/// sigma-bar(x) = sum_ij x_i sigma_ij x_j.
inline double mean_fitness(const ModelParams& p, const SimplexPoint& x) {
  double s = 0;
  for (int i = 0; i < p.K(); ++i) s += x.frequency(i) * marginal_fitness(p, i, x);
  return s;
}

/// Coefficients of L = 1/2 sum b_ij d_i d_j + sum a_i d_i in the K-1 free coordinates.
struct LocalGeneratorCoefficients {
  std::vector<double> drift;      // a_i, length K-1
  std::vector<double> diffusion;  // b_ij, row-major (K-1) x (K-1)
};

inline LocalGeneratorCoefficients drift_diffusion(const ModelParams& p, const SimplexPoint& x) {
  check_point(p, x);
  const int d = p.dimension();
  const double sbar = mean_fitness(p, x);
  const double ts = p.theta_sum();
  LocalGeneratorCoefficients g{std::vector<double>(d), std::vector<double>(d * d)};
  for (int i = 0; i < d; ++i) {
    g.drift[i] = 0.5 * (p.theta()[i] - ts * x[i]) + x[i] * (marginal_fitness(p, i, x) - sbar);
    for (int j = 0; j < d; ++j) g.diffusion[i * d + j] = x[i] * ((i == j ? 1.0 : 0.0) - x[j]);
  }
  return g;
}

/// lambda_l = l (l - 1 + |theta|) / 2
inline double neutral_eigenvalue(int l, double theta_sum) {
  if (l < 0) throw ParameterDomainError("negative degree");
  return 0.5 * l * (l - 1 + theta_sum);
}

/// log prod_i x_i^{theta_i - 1} (unnormalized neutral stationary density).
/// Returns -inf where the density vanishes; throws where it is infinite.
inline double log_neutral_stationary(const ModelParams& p, const SimplexPoint& x) {
  check_point(p, x);
  double s = 0;
  for (int i = 0; i < p.K(); ++i) {
    const double xi = x.frequency(i);
    const double e = p.theta()[i] - 1;
    if (e == 0) continue;
    if (xi <= 0) {
      if (e < 0) throw BoundarySingularityError("stationary density is infinite on this boundary face");
      return -INFINITY;
    }
    s += e * std::log(xi);
  }
  return s;
}

/// Unnormalized stationary density e^{sigma-bar(x)} prod x_i^{theta_i - 1}.
inline double stationary_unnormalized(const ModelParams& p, const SimplexPoint& x) {
  return std::exp(mean_fitness(p, x) + log_neutral_stationary(p, x));
}

/// Q(x) = 1/2 [ sum x_i sigma_i^2 + sum theta_i sigma_i + sum x_i sigma_ii
///              - (1 + |theta|) sigma-bar - sigma-bar^2 ]   (sums over all K alleles)
/// Evaluated directly from the model, independent of the polynomial expansion.
inline double q_direct(const ModelParams& p, const SimplexPoint& x) {
  check_point(p, x);
  double s1 = 0, s2 = 0, s3 = 0;
  for (int i = 0; i < p.K(); ++i) {
    const double si = marginal_fitness(p, i, x);
    s1 += x.frequency(i) * si * si;
    s2 += p.theta()[i] * si;
    s3 += x.frequency(i) * p.sigma(i, i);
  }
  const double sbar = mean_fitness(p, x);
  return 0.5 * (s1 + s2 + s3 - (1 + p.theta_sum()) * sbar - sbar * sbar);
}

/// Coefficients of Q as a polynomial in x_1..x_{K-1}:
///   Q(x) = sum_{L=0}^{4} sum_{ordered tuples (i_1..i_L)} q(i_1..i_L) x_{i_1} ... x_{i_L}.
/// Tuples are stored flat in base K-1, first index most significant.
template <class Real = double>
struct QCoefficients {
  int dim = 0;
  std::array<std::vector<Real>, 5> by_order;

  static std::size_t flat(const std::vector<int>& t, int dim) {
    std::size_t f = 0;
    for (int v : t) f = f * dim + v;
    return f;
  }
  const Real& at(const std::vector<int>& t) const { return by_order[t.size()][flat(t, dim)]; }
  Real& at(const std::vector<int>& t) { return by_order[t.size()][flat(t, dim)]; }

  /// Tuple for flat position f of order L.
  std::vector<int> tuple(int L, std::size_t f) const {
    std::vector<int> t(L);
    for (int k = L - 1; k >= 0; --k) {
      t[k] = static_cast<int>(f % dim);
      f /= dim;
    }
    return t;
  }
};

template <class Real = double>
QCoefficients<Real> q_coefficients(const ModelParams& p) {
  const int K = p.K(), d = p.dimension(), R = K - 1;
  auto s = [&](int a, int b) { return Real(p.sigma(a, b)); };
  const Real ts = theta_tail_sum<Real>(p.theta(), 0);
  auto th = [&](int j) { return Real(p.theta()[j]); };
  const Real sRR = s(R, R);
  const Real half = Real(0.5);

  QCoefficients<Real> q;
  q.dim = d;
  std::size_t n = 1;
  for (int L = 0; L <= 4; ++L, n *= d) q.by_order[L].assign(n, Real(0));

  Real q0 = -ts * sRR;
  for (int j = 0; j < K; ++j) q0 += th(j) * s(R, j);
  q.by_order[0][0] = half * q0;

  for (int i = 0; i < d; ++i) {
    Real v = s(i, R) * s(i, R) + sRR * sRR - Real(2) * sRR * s(i, R) - Real(2) * (Real(1) + ts) * s(i, R) +
             (Real(1) + Real(2) * ts) * sRR + s(i, i);
    for (int j = 0; j < K; ++j) v += th(j) * (s(i, j) - s(j, R));
    q.by_order[1][i] = half * v;
  }

  for (int i1 = 0; i1 < d; ++i1)
    for (int i2 = 0; i2 < d; ++i2) {
      const Real v = Real(2) * s(i1, R) * s(i1, i2) - Real(3) * s(i1, R) * s(i2, R) +
                     Real(8) * s(i2, R) * sRR - Real(2) * sRR * s(i1, i2) - Real(2) * s(i1, R) * s(i1, R) -
                     Real(3) * sRR * sRR - (Real(1) + ts) * (s(i1, i2) + sRR - Real(2) * s(i2, R));
      q.by_order[2][i1 * d + i2] = half * v;
    }

  for (int i1 = 0; i1 < d; ++i1)
    for (int i2 = 0; i2 < d; ++i2)
      for (int i3 = 0; i3 < d; ++i3) {
        const Real v = (s(i1, i3) - s(i1, R)) * (s(i1, i2) - s(i1, R)) -
                       (s(i3, R) - sRR) * (s(i2, R) - sRR) -
                       Real(4) * (s(i2, i3) + sRR - Real(2) * s(i3, R)) * (s(i1, R) - sRR);
        q.by_order[3][(i1 * d + i2) * d + i3] = half * v;
      }

  for (int i1 = 0; i1 < d; ++i1)
    for (int i2 = 0; i2 < d; ++i2)
      for (int i3 = 0; i3 < d; ++i3)
        for (int i4 = 0; i4 < d; ++i4) {
          const Real v = (s(i1, i2) + sRR - Real(2) * s(i2, R)) * (s(i3, i4) + sRR - Real(2) * s(i4, R));
          q.by_order[4][((i1 * d + i2) * d + i3) * d + i4] = -half * v;
        }
  return q;
}

/// Evaluates the expansion sum_L sum_t q(t) prod x_t.
template <class Real>
double eval_q_polynomial(const QCoefficients<Real>& q, const SimplexPoint& x) {
  if (static_cast<int>(x.dim()) != q.dim) throw ParameterDomainError("point dimension != K-1");
  double total = 0;
  for (int L = 0; L <= 4; ++L)
    for (std::size_t f = 0; f < q.by_order[L].size(); ++f) {
      const auto t = q.tuple(L, f);
      double term = static_cast<double>(q.by_order[L][f]);
      for (int i : t) term *= x[i];
      total += term;
    }
  return total;
}

}  // namespace wfspec
