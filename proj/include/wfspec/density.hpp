#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "multivariate_jacobi.hpp"
#include "parallel.hpp"
#include "simplex_coords.hpp"
#include "spectral.hpp"

namespace wfspec {

/// Series cutoffs: eigenpairs n < n_max, basis coefficients |m| <= m_max.
struct DensityCutoffs {
  std::size_t n_max = 562;
  int m_max = 36;
};

inline DensityCutoffs resolve_cutoffs(const SpectralDecomposition& sd, DensityCutoffs c) {
  if (c.n_max > sd.size()) throw ParameterDomainError("n_max exceeds U(D)");
  if (c.m_max < 0 || c.m_max > sd.truncation) throw ParameterDomainError("m_max must lie in [0, D]");
  if (c.n_max == 0) throw ParameterDomainError("n_max must be positive");
  return c;
}

struct DensityQuery {
  double t = 0;
  SimplexPoint x;
  std::vector<SimplexPoint> targets;
  DensityCutoffs cutoffs;
};

struct DensityResult {
  std::vector<double> values;
  /// max over targets of the first omitted term |e^{-Lambda_{n_max} t} B(x) B(y) Pi(y)|; 0 when n_max = U(D)
  double dropped_term = 0;
  /// dropped_term exceeded kDroppedTermThreshold times the largest |value|
  bool truncation_warning = false;
  double min_value = 0;
  double max_value = 0;
};

inline constexpr double kDroppedTermThreshold = 1e-6;

/// p(t; x, .) for a fixed initial point, with the x-side mode values precomputed.
/// Values are assembled as exp(log Pi0(y) + (sigma-bar(y) - sigma-bar(x)) / 2) times
/// sum_n e^{-Lambda_n t} w_n(x) w_n(y), with w_n = sum_m u_nm P_m.
class DensityEvaluator {
 public:
  DensityEvaluator(const SpectralDecomposition& sd, const SimplexPoint& x, DensityCutoffs cutoffs)
      : sd_(sd), cut_(resolve_cutoffs(sd, cutoffs)), evaluator_(sd.basis(), cut_.m_max) {
    check_point(sd.model, x);
    // keep one extra mode for the dropped-term diagnostic when available
    extra_ = cut_.n_max < sd.size() ? 1 : 0;
    wx_ = modes(x);
    sbar_x_ = mean_fitness(sd.model, x);
  }

  const DensityCutoffs& cutoffs() const { return cut_; }

  /// p(t;x,y) / Pi0(y), smooth up to the boundary.
  double ratio(double t, const SimplexPoint& y) const { return ratios({t}, y)[0]; }

  /// ratio() for several times at once (one basis evaluation at y).
  std::vector<double> ratios(const std::vector<double>& times, const SimplexPoint& y) const {
    return ratios_with_tail(times, y, nullptr);
  }

  double value(double t, const SimplexPoint& y) const {
    return ratio(t, y) * std::exp(log_neutral_stationary(sd_.model, y));
  }

  /// As ratios(); also stores |first omitted term| / Pi0(y) per time in tail.
  std::vector<double> ratios_with_tail(const std::vector<double>& times, const SimplexPoint& y,
                                       std::vector<double>* tail) const {
    check_point(sd_.model, y);
    for (double t : times)
      if (!(t > 0)) throw ParameterDomainError("t must be positive: at t = 0 the density is a Dirac delta");
    const std::vector<double> wy = modes(y);
    const double factor = std::exp(0.5 * (mean_fitness(sd_.model, y) - sbar_x_));
    std::vector<double> out(times.size());
    if (tail) tail->assign(times.size(), 0.0);
    for (std::size_t k = 0; k < times.size(); ++k) {
      long double s = 0;
      for (std::size_t n = 0; n < cut_.n_max; ++n) s += std::exp(-sd_.eigenvalues(n) * times[k]) * wx_[n] * wy[n];
      out[k] = factor * static_cast<double>(s);
      if (tail && extra_) {
        const std::size_t n = cut_.n_max;
        (*tail)[k] = factor * std::abs(std::exp(-sd_.eigenvalues(n) * times[k]) * wx_[n] * wy[n]);
      }
    }
    return out;
  }

 private:
  std::vector<double> modes(const SimplexPoint& x) const {
    const std::vector<double> P = evaluator_(x);
    const std::size_t rows = cut_.n_max + extra_;
    std::vector<double> w(rows);
    Eigen::Map<const Eigen::VectorXd> Pv(P.data(), P.size());
    Eigen::Map<Eigen::VectorXd>(w.data(), rows).noalias() = sd_.coefficients.topLeftCorner(rows, P.size()) * Pv;
    return w;
  }

  const SpectralDecomposition& sd_;
  DensityCutoffs cut_;
  BasisEvaluator evaluator_;
  std::size_t extra_ = 0;
  std::vector<double> wx_;
  double sbar_x_ = 0;
};

/// p(t; x, y) = sum_{n < n_max} e^{-Lambda_n t} B_n(x) B_n(y) Pi(y) on every target.
inline DensityResult transition_density(const SpectralDecomposition& sd, const DensityQuery& q) {
  const DensityEvaluator ev(sd, q.x, q.cutoffs);
  DensityResult r;
  r.values.assign(q.targets.size(), 0.0);
  std::vector<double> tails(q.targets.size(), 0.0);
  parallel_for(q.targets.size(), [&](std::size_t k) {
    std::vector<double> tail;
    const double pi0 = std::exp(log_neutral_stationary(sd.model, q.targets[k]));
    r.values[k] = ev.ratios_with_tail({q.t}, q.targets[k], &tail)[0] * pi0;
    tails[k] = tail[0] * pi0;
  });
  if (!r.values.empty()) {
    r.min_value = *std::min_element(r.values.begin(), r.values.end());
    r.max_value = *std::max_element(r.values.begin(), r.values.end());
  }
  double peak = 0;
  for (double v : r.values) peak = std::max(peak, std::abs(v));
  for (double t : tails) r.dropped_term = std::max(r.dropped_term, t);
  r.truncation_warning = r.dropped_term > kDroppedTermThreshold * peak;
  return r;
}

inline double transition_density(const SpectralDecomposition& sd, double t, const SimplexPoint& x,
                                 const SimplexPoint& y, DensityCutoffs cutoffs) {
  return DensityEvaluator(sd, x, cutoffs).value(t, y);
}

/// C_stat = int Pi from the leading eigenvector: (sum u_0m^2 C_m) / B_0(vertex K)^2 with
/// P_m(0) = prod_j (-1)^{m_j} Gamma(m_j + theta_j) / (Gamma(m_j + 1) Gamma(theta_j)).
inline double normalizing_constant(const SpectralDecomposition& sd, int m_max) {
  if (m_max < 0 || m_max > sd.truncation) throw ParameterDomainError("m_max must lie in [0, D]");
  const auto& theta = sd.model.theta();
  const std::size_t cols = sd.enumeration->degree_begin(m_max + 1);
  long double num = 0, den = 0, den_abs = 0;
  for (std::size_t m = 0; m < cols; ++m) {
    const IndexVector& idx = (*sd.enumeration)[m];
    double log_mag = 0;
    int parity = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const int n = idx[j];
      log_mag += std::lgamma(n + theta[j]) - std::lgamma(n + 1.0) - std::lgamma(theta[j]);
      parity += n;
    }
    const double r0 = (parity % 2 ? -1.0 : 1.0) * std::exp(log_mag);
    const double u = sd.coefficients(0, m);
    num += static_cast<long double>(u) * u * std::exp(sd.log_norms[m]);
    den += static_cast<long double>(u) * r0;
    den_abs += std::abs(static_cast<long double>(u) * r0);
  }
  if (!(std::abs(den) > 1e-12 * den_abs) || den == 0)
    throw NumericalError("normalizing constant denominator vanishes; B_0 is not converged");
  return static_cast<double>(num / (den * den));
}

/// ||p(t;x,.) - Pi/C_stat||^2 in L^2(1/Pi):
///   sum_{1 <= n < n_max} e^{-2 Lambda_n t} e^{-sigma-bar(x)} w_n(x)^2 / sum_m u_nm^2 C_m.
inline std::vector<double> distance_to_stationarity(const SpectralDecomposition& sd, const SimplexPoint& x,
                                                    const std::vector<double>& times, DensityCutoffs cutoffs) {
  cutoffs = resolve_cutoffs(sd, cutoffs);
  for (double t : times)
    if (!(t > 0)) throw ParameterDomainError("t must be positive");
  const auto w = mode_values(sd, x, cutoffs.n_max, cutoffs.m_max);
  const double e = std::exp(-mean_fitness(sd.model, x));
  std::vector<double> norms(cutoffs.n_max);
  for (std::size_t n = 1; n < cutoffs.n_max; ++n) norms[n] = sd.norm(n, cutoffs.m_max);
  std::vector<double> out;
  for (double t : times) {
    long double s = 0;
    for (std::size_t n = 1; n < cutoffs.n_max; ++n) s += std::exp(-2 * sd.eigenvalues(n) * t) * e * w[n] * w[n] / norms[n];
    out.push_back(static_cast<double>(s));
  }
  return out;
}

/// Closed-form neutral expansion sum_{|n| <= L} e^{-lambda_|n| t} P_n(x) P_n(y) Pi0(y) / C_n,
/// evaluated without any eigensolve.
inline double neutral_transition_density(const ModelParams& p, double t, const SimplexPoint& x,
                                         const SimplexPoint& y, int degree_cutoff) {
  if (!p.is_neutral()) throw ParameterDomainError("neutral expansion requires sigma = 0");
  if (!(t > 0)) throw ParameterDomainError("t must be positive: at t = 0 the density is a Dirac delta");
  if (degree_cutoff < 0) throw ParameterDomainError("degree cutoff must be non-negative");
  check_point(p, x);
  check_point(p, y);
  const MultiJacobiBasis basis(p.theta(), degree_cutoff);
  const BasisEvaluator ev(basis, degree_cutoff);
  const auto Px = ev(x), Py = ev(y);
  const auto log_norms = basis.log_norms();
  const double ts = p.theta_sum();
  long double s = 0;
  for (std::size_t k = 0; k < Px.size(); ++k) {
    const int l = basis.enumeration()[k].total();
    s += std::exp(-neutral_eigenvalue(l, ts) * t - log_norms[k]) * Px[k] * Py[k];
  }
  return static_cast<double>(s) * std::exp(log_neutral_stationary(p, y));
}

}  // namespace wfspec
