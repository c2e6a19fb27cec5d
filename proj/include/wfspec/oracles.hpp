#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "simplex_coords.hpp"

namespace wfspec {

/// Gauss-Jacobi nodes and weights on [0,1] for the weight xi^{a-1} (1-xi)^{b-1}.
struct GaussJacobiRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussJacobiRule gauss_jacobi_rule(int n, double a, double b) {
  if (n < 1) throw ParameterDomainError("quadrature needs at least one node");
  if (!(a > 0) || !(b > 0)) throw ParameterDomainError("Gauss-Jacobi exponents must exceed -1");
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;
  // GSL weight on [0,1] is (1-x)^alpha x^beta
  gsl_integration_fixed_workspace* w =
      gsl_integration_fixed_alloc(gsl_integration_fixed_jacobi, n, 0.0, 1.0, b - 1, a - 1);
  if (!w) throw NumericalError("GSL failed to build a Gauss-Jacobi rule");
  GaussJacobiRule rule;
  const double* x = gsl_integration_fixed_nodes(w);
  const double* wt = gsl_integration_fixed_weights(w);
  rule.nodes.assign(x, x + n);
  rule.weights.assign(wt, wt + n);
  gsl_integration_fixed_free(w);
  return rule;
}

/// Tensor-product Gauss-Jacobi rule over the simplex in stick-breaking
/// coordinates. Axis c uses the weight xi^{theta_c - 1}(1-xi)^{Theta_c - 1},
/// which is exactly Pi0_theta times the Jacobian, so singularities of the form
/// prod x_i^{theta_i - 1} are absorbed into the weights.
class SimplexQuadrature {
 public:
  /// Plain Lebesgue measure (theta = 1).
  SimplexQuadrature(int K, int resolution) : SimplexQuadrature(std::vector<double>(K, 1.0), resolution) {}

  SimplexQuadrature(std::vector<double> theta, int resolution) : theta_(std::move(theta)) {
    const int K = static_cast<int>(theta_.size());
    if (K < 2 || K > 4) throw ParameterDomainError("simplex quadrature supports K in {2,3,4}");
    if (resolution < 1) throw ParameterDomainError("quadrature resolution must be >= 1");
    const int d = K - 1;
    std::vector<GaussJacobiRule> rules;
    for (int c = 0; c < d; ++c) {
      double rest = 0;
      for (int i = c + 1; i < K; ++i) rest += theta_[i];
      rules.push_back(gauss_jacobi_rule(resolution, theta_[c], rest));
    }
    std::size_t total = 1;
    for (int c = 0; c < d; ++c) total *= resolution;
    points_.reserve(total);
    weights_.reserve(total);
    measure_weights_.reserve(total);
    std::vector<int> idx(d, 0);
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> xi(d);
      double w = 1;
      for (int c = 0; c < d; ++c) {
        xi[c] = rules[c].nodes[idx[c]];
        w *= rules[c].weights[idx[c]];
      }
      SimplexPoint x = from_cube(CubePoint(xi));
      double log_pi0 = 0;
      for (int i = 0; i < K; ++i)
        if (theta_[i] != 1) log_pi0 += (theta_[i] - 1) * std::log(x.frequency(i));
      points_.push_back(std::move(x));
      weights_.push_back(w);
      measure_weights_.push_back(w * std::exp(-log_pi0));
      for (int c = d - 1; c >= 0; --c) {
        if (++idx[c] < resolution) break;
        idx[c] = 0;
      }
    }
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<SimplexPoint>& points() const { return points_; }
  /// Weights for integrals of g * Pi0_theta.
  const std::vector<double>& kernel_weights() const { return weights_; }
  /// Weights for plain integrals of f over the simplex.
  const std::vector<double>& measure_weights() const { return measure_weights_; }

  /// int f(x) dx. Accurate when f / Pi0_theta is smooth.
  template <class F>
  double integrate(F&& f) const {
    return sum(f, measure_weights_);
  }

  /// int g(x) Pi0_theta(x) dx.
  template <class F>
  double integrate_kernel(F&& g) const {
    return sum(g, weights_);
  }

 private:
  template <class F>
  double sum(F& f, const std::vector<double>& w) const {
    std::vector<double> values(points_.size());
    parallel_for(points_.size(), [&](std::size_t k) { values[k] = f(points_[k]); });
    long double s = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!std::isfinite(values[k])) throw NumericalError("non-finite integrand sample in simplex quadrature");
      s += static_cast<long double>(w[k]) * values[k];
    }
    return static_cast<double>(s);
  }

  std::vector<double> theta_;
  std::vector<SimplexPoint> points_;
  std::vector<double> weights_;
  std::vector<double> measure_weights_;
};

/// int_{simplex} f(x) dx with resolution nodes per axis.
template <class F>
double simplex_quadrature(F&& f, int K, int resolution) {
  return SimplexQuadrature(K, resolution).integrate(f);
}

/// Central-difference evaluation of (L f)(x) = 1/2 sum b_ij d_i d_j f + sum a_i d_i f.
template <class F>
double fd_generator_apply(const ModelParams& p, F&& f, const SimplexPoint& x, double h) {
  check_point(p, x);
  if (!(h > 0)) throw ParameterDomainError("finite-difference step must be positive");
  if (x.boundary_distance() < 2 * h) throw ParameterDomainError("point closer than 2h to the simplex boundary");
  const int d = p.dimension();
  const auto coef = drift_diffusion(p, x);
  auto shifted = [&](int i, double di, int j, double dj) {
    std::vector<double> y = x.coords();
    y[i] += di;
    if (j >= 0) y[j] += dj;
    return f(SimplexPoint(std::move(y)));
  };
  const double f0 = f(x);
  double out = 0;
  for (int i = 0; i < d; ++i) {
    const double fp = shifted(i, h, -1, 0), fm = shifted(i, -h, -1, 0);
    out += coef.drift[i] * (fp - fm) / (2 * h);
    out += 0.5 * coef.diffusion[i * d + i] * (fp - 2 * f0 + fm) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      const double fij = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) + shifted(i, -h, j, -h)) /
                         (4 * h * h);
      // b is symmetric, so the (i,j) and (j,i) terms are equal
      out += coef.diffusion[i * d + j] * fij;
    }
  }
  return out;
}

/// Richardson extrapolation (4 L(h/2) - L(h)) / 3 of the central stencil, O(h^4).
/// Needed for eigenfunctions with small eigenvalue under strong selection, where
/// L f is a near-cancellation of O(sigma) terms and no single step h balances
/// truncation against roundoff.
template <class F>
double fd_generator_apply_extrapolated(const ModelParams& p, F&& f, const SimplexPoint& x, double h) {
  return (4 * fd_generator_apply(p, f, x, h / 2) - fd_generator_apply(p, f, x, h)) / 3;
}

/// Discrete diploid Wright-Fisher run parameters. Per generation: selection
/// with genotype fitness 1 + sigma_ij / (2N), mutation x' = (1 - sum u) x + u
/// with u_i = theta_i / (4N), then multinomial sampling of 2N gametes.
/// One generation is 1/(2N) diffusion time units.
struct MCConfig {
  std::int64_t N = 10000;
  std::int64_t generations = 0;
  std::int64_t replicates = 1000;
  std::uint64_t seed = 1;
  std::int64_t record_every = 1;  // summaries at generations 0, k, 2k, ... and the last
  int histogram_bins = 0;         // bins per axis for the final-generation histogram; 0 disables
  bool mutation = true;           // false sets u = 0 (pure drift and selection)

  double generations_to_time(std::int64_t g) const { return static_cast<double>(g) / (2.0 * N); }
  static std::int64_t time_to_generations(double t, std::int64_t N) {
    return static_cast<std::int64_t>(std::llround(t * 2.0 * N));
  }
};

struct MCSummary {
  int dim = 0;
  std::int64_t replicates = 0;
  std::vector<std::int64_t> generation;
  std::vector<double> time;
  std::vector<std::vector<double>> mean;        // [record][i]
  std::vector<std::vector<double>> covariance;  // [record][i*dim+j], sample covariance
  int histogram_bins = 0;
  std::vector<std::int64_t> histogram;          // final generation, flat over dim axes, first axis slowest

  /// Standard error of the mean of coordinate i at record r.
  double standard_error(std::size_t r, int i) const {
    return std::sqrt(covariance[r][i * dim + i] / static_cast<double>(replicates));
  }
};

inline void validate_mc(const ModelParams& p, const MCConfig& cfg) {
  if (cfg.N < 1) throw ConfigError("MC population size must be positive");
  if (cfg.generations < 0) throw ConfigError("MC generations must be non-negative");
  if (cfg.replicates < 2) throw ConfigError("MC needs at least two replicates");
  if (cfg.record_every < 1) throw ConfigError("MC record_every must be positive");
  double usum = 0;
  for (double t : p.theta()) {
    const double u = cfg.mutation ? t / (4.0 * cfg.N) : 0.0;
    if (cfg.mutation && !(u > 0 && u < 1)) throw ConfigError("per-generation mutation rate outside (0,1)");
    usum += u;
  }
  if (usum >= 1) throw ConfigError("total mutation rate must be below 1");
  if (p.max_abs_sigma() / (2.0 * cfg.N) >= 1) throw ConfigError("selection too strong for population size");
}

inline MCSummary mc_simulate(const ModelParams& p, const MCConfig& cfg, const SimplexPoint& x0) {
  check_point(p, x0);
  validate_mc(p, cfg);
  const int K = p.K(), d = K - 1;
  const std::int64_t twoN = 2 * cfg.N;

  std::vector<std::int64_t> recorded;
  for (std::int64_t g = 0; g <= cfg.generations; g += cfg.record_every) recorded.push_back(g);
  if (recorded.back() != cfg.generations) recorded.push_back(cfg.generations);
  const std::size_t R = recorded.size();

  std::vector<double> u(K, 0.0);
  double usum = 0;
  if (cfg.mutation)
    for (int i = 0; i < K; ++i) usum += (u[i] = p.theta()[i] / (4.0 * cfg.N));
  const double inv2N = 1.0 / static_cast<double>(twoN);

  const int B = cfg.histogram_bins;
  std::size_t hist_size = 0;
  if (B > 0) {
    hist_size = 1;
    for (int c = 0; c < d; ++c) hist_size *= B;
  }

  // Exact integer sums of counts and count products make the result
  // independent of how replicates are split across workers.
  struct Accumulator {
    std::vector<std::int64_t> sum, prod, hist;
  };
  const std::size_t reps = cfg.replicates;
  std::vector<Accumulator> acc(worker_count(reps));
  for (auto& a : acc) {
    a.sum.assign(R * d, 0);
    a.prod.assign(R * d * d, 0);
    a.hist.assign(hist_size, 0);
  }

  std::vector<std::int64_t> start(K);
  {
    std::int64_t used = 0;
    for (int i = 0; i < d; ++i) used += (start[i] = std::llround(x0[i] * twoN));
    if (used > twoN) throw ConfigError("initial point rounds outside the simplex");
    start[d] = twoN - used;
  }

  parallel_chunks(reps, [&](std::size_t w, std::size_t begin, std::size_t end) {
    Accumulator& a = acc[w];
    std::vector<std::int64_t> counts(K);
    std::vector<double> x(K), y(K);
    for (std::size_t rep = begin; rep < end; ++rep) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
      std::mt19937_64 rng(seq);
      counts = start;
      std::size_t next = 0;
      for (std::int64_t g = 0;; ++g) {
        if (next < R && recorded[next] == g) {
          for (int i = 0; i < d; ++i) {
            a.sum[next * d + i] += counts[i];
            for (int j = 0; j < d; ++j) a.prod[(next * d + i) * d + j] += counts[i] * counts[j];
          }
          ++next;
        }
        if (g == cfg.generations) break;
        for (int i = 0; i < K; ++i) x[i] = counts[i] * inv2N;
        // selection: x_i (1 + sigma_i / 2N) / (1 + sigma-bar / 2N)
        double wbar = 0;
        for (int i = 0; i < K; ++i) {
          double si = 0;
          for (int j = 0; j < K; ++j) si += p.sigma(i, j) * x[j];
          y[i] = x[i] * (1 + si * inv2N);
          wbar += y[i];
        }
        for (int i = 0; i < K; ++i) y[i] = (1 - usum) * (y[i] / wbar) + u[i];
        std::int64_t remaining = twoN;
        double mass = 1;
        for (int i = 0; i < K - 1; ++i) {
          const double q = mass > 0 ? std::min(1.0, std::max(0.0, y[i] / mass)) : 0.0;
          const std::int64_t c = remaining > 0 ? std::binomial_distribution<std::int64_t>(remaining, q)(rng) : 0;
          counts[i] = c;
          remaining -= c;
          mass -= y[i];
        }
        counts[K - 1] = remaining;
      }
      if (B > 0) {
        std::size_t cell = 0;
        for (int c = 0; c < d; ++c) {
          const std::int64_t bin = std::min<std::int64_t>(B - 1, counts[c] * B / twoN);
          cell = cell * B + bin;
        }
        ++a.hist[cell];
      }
    }
  });

  MCSummary s;
  s.dim = d;
  s.replicates = cfg.replicates;
  s.histogram_bins = B;
  s.histogram.assign(hist_size, 0);
  const double n = static_cast<double>(cfg.replicates);
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<long double> sum(d, 0), prod(d * d, 0);
    for (const auto& a : acc) {
      for (int i = 0; i < d; ++i) sum[i] += a.sum[r * d + i];
      for (int k = 0; k < d * d; ++k) prod[k] += a.prod[r * d * d + k];
    }
    std::vector<double> mean(d), cov(d * d);
    for (int i = 0; i < d; ++i) mean[i] = static_cast<double>(sum[i] / (n * twoN));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const long double e_xy = prod[i * d + j] / (static_cast<long double>(twoN) * twoN);
        const long double e_x = sum[i] / static_cast<long double>(twoN), e_y = sum[j] / static_cast<long double>(twoN);
        cov[i * d + j] = static_cast<double>((e_xy - e_x * e_y / n) / (n - 1));
      }
    s.generation.push_back(recorded[r]);
    s.time.push_back(cfg.generations_to_time(recorded[r]));
    s.mean.push_back(std::move(mean));
    s.covariance.push_back(std::move(cov));
  }
  for (const auto& a : acc)
    for (std::size_t k = 0; k < hist_size; ++k) s.histogram[k] += a.hist[k];
  return s;
}

}  // namespace wfspec
