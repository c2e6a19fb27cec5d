#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "density.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "spectral.hpp"

namespace wfspec {

struct Check {
  std::string name;
  double value = 0;
  double tolerance = 0;
  bool pass = false;
};

struct ValidationReport {
  std::string suite;
  std::vector<Check> checks;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  void add(std::string name, double value, double tolerance) {
    checks.push_back({std::move(name), value, tolerance, value <= tolerance});
  }

  json to_json() const {
    json j{{"suite", suite}, {"pass", pass()}, {"checks", json::array()}};
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    return j;
  }
};

/// Interior point drawn uniformly from the simplex, at least `margin` from every face.
inline SimplexPoint random_interior_point(std::mt19937_64& rng, int K, double margin) {
  std::exponential_distribution<double> e(1.0);
  while (true) {
    std::vector<double> g(K);
    double s = 0;
    for (double& v : g) s += (v = e(rng));
    std::vector<double> x(K - 1);
    double min_freq = g[K - 1] / s;
    for (int i = 0; i < K - 1; ++i) min_freq = std::min(min_freq, x[i] = g[i] / s);
    if (min_freq >= margin) return SimplexPoint(std::move(x));
  }
}

/// Random (theta, sigma) with sigma symmetric and sigma_KK = 0.
inline ModelParams random_model(std::mt19937_64& rng, int K, double sigma_range) {
  std::uniform_real_distribution<double> th(0.05, 3.0), sg(-sigma_range, sigma_range);
  std::vector<double> theta(K);
  for (double& t : theta) t = th(rng);
  std::vector<std::vector<double>> s(K, std::vector<double>(K));
  for (int i = 0; i < K; ++i)
    for (int j = 0; j <= i; ++j) s[i][j] = s[j][i] = sg(rng);
  s[K - 1][K - 1] = 0;
  return ModelParams(theta, s);
}

/// Expansion coefficients q(...) against the closed form of Q:
/// |sum q x - Q(x)| / (1 + |Q(x)|), worst over draws with K cycling through 2..5.
inline ValidationReport validate_q(std::uint64_t seed, int draws = 20, int points = 200, double tol = 1e-10) {
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int r = 0; r < draws; ++r) {
    const int K = 2 + r % 4;
    const ModelParams p = random_model(rng, K, 20.0);
    const auto q = q_coefficients(p);
    for (int k = 0; k < points; ++k) {
      const SimplexPoint x = random_interior_point(rng, K, 0.0);
      const double direct = q_direct(p, x);
      worst = std::max(worst, std::abs(eval_q_polynomial(q, x) - direct) / (1 + std::abs(direct)));
    }
  }
  ValidationReport rep{"q", {}};
  rep.add("max |sum q x - Q| / (1 + |Q|)", worst, tol);
  return rep;
}

/// Quadrature Gram matrix of P_n, |n| <= max_degree, against diag(C_n), scaled by sqrt(C_a C_b).
inline ValidationReport validate_orthogonality(const std::vector<double>& theta, int max_degree = 4,
                                               int resolution = 30, double tol = 1e-6) {
  const MultiJacobiBasis basis(theta, max_degree);
  const int K = static_cast<int>(theta.size());
  if (K > 4) throw ParameterDomainError("orthogonality check uses simplex quadrature, K <= 4");
  const SimplexQuadrature Q(theta, resolution);
  const BasisEvaluator ev(basis, max_degree);
  const std::size_t U = basis.enumeration().size();
  std::vector<std::vector<double>> P(Q.size());
  parallel_for(Q.size(), [&](std::size_t k) { P[k] = ev(Q.points()[k]); });
  const auto log_c = basis.log_norms();
  double worst = 0;
  for (std::size_t a = 0; a < U; ++a)
    for (std::size_t b = a; b < U; ++b) {
      long double g = 0;
      for (std::size_t k = 0; k < Q.size(); ++k) g += Q.kernel_weights()[k] * P[k][a] * P[k][b];
      const double ref = a == b ? std::exp(log_c[a]) : 0.0;
      worst = std::max(worst, std::abs(static_cast<double>(g) - ref) / std::exp(0.5 * (log_c[a] + log_c[b])));
    }
  ValidationReport rep{"orthogonality", {}};
  rep.add("max |Gram - diag(C)| / sqrt(C_a C_b)", worst, tol);
  return rep;
}

/// Worst distance between the sorted eigenvalues of the neutral M^[D] and the
/// sorted list of lambda_l repeated count_at_degree(K, l) times.
inline double neutral_spectrum_error(const std::vector<double>& theta, int D) {
  const ModelParams p = ModelParams::neutral(theta);
  AssemblyOptions opt;
  opt.precision = PrecisionMode::double_precision;
  const auto sd = eigensolve(assemble_M(p, D, opt));
  std::vector<double> expected;
  for (int l = 0; l <= D; ++l)
    for (std::uint64_t r = 0; r < count_at_degree(p.K(), l); ++r) expected.push_back(neutral_eigenvalue(l, p.theta_sum()));
  std::sort(expected.begin(), expected.end());
  double worst = 0;
  for (std::size_t n = 0; n < sd.size(); ++n) worst = std::max(worst, std::abs(sd.eigenvalues(n) - expected[n]));
  return worst;
}

/// Neutral spectrum and neutral density, eigensolve path vs closed-form expansion.
inline ValidationReport validate_neutral(const std::vector<double>& theta, int D, double t, std::uint64_t seed,
                                         int pairs = 5) {
  ValidationReport rep{"neutral", {}};
  rep.add("max |Lambda_n - lambda_l|", neutral_spectrum_error(theta, D), 1e-10);
  const ModelParams p = ModelParams::neutral(theta);
  AssemblyOptions opt;
  opt.precision = PrecisionMode::double_precision;
  const auto sd = decompose(p, D, opt);
  const DensityCutoffs cut{sd.size(), D};
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int k = 0; k < pairs; ++k) {
    const SimplexPoint x = random_interior_point(rng, p.K(), 0.05), y = random_interior_point(rng, p.K(), 0.05);
    const double spectral = transition_density(sd, t, x, y, cut);
    const double closed = neutral_transition_density(p, t, x, y, D);
    worst = std::max(worst, std::abs(spectral - closed) / std::abs(closed));
  }
  rep.add("max rel |p_spectral - p_neutral|", worst, 1e-6);
  return rep;
}

/// E[Y_i(t)] = int y_i p(t;x,y) dy by kernel quadrature of y_i p / Pi0.
inline std::vector<double> spectral_moments(const SpectralDecomposition& sd, const SimplexPoint& x, double t,
                                            DensityCutoffs cutoffs, int resolution) {
  const DensityEvaluator ev(sd, x, cutoffs);
  const SimplexQuadrature Q(sd.model.theta(), resolution);
  const int d = sd.model.dimension();
  std::vector<double> ratio(Q.size());
  parallel_for(Q.size(), [&](std::size_t k) { ratio[k] = ev.ratio(t, Q.points()[k]); });
  std::vector<double> m(d + 1, 0.0);  // last slot: total mass
  for (std::size_t k = 0; k < Q.size(); ++k) {
    const double w = Q.kernel_weights()[k] * ratio[k];
    for (int i = 0; i < d; ++i) m[i] += w * Q.points()[k][i];
    m[d] += w;
  }
  return m;
}

struct MomentComparison {
  std::vector<double> spectral;
  std::vector<double> mc;
  std::vector<double> standard_error;
  double mass = 0;
};

inline MomentComparison compare_mc_moments(const SpectralDecomposition& sd, const SimplexPoint& x, double t,
                                           DensityCutoffs cutoffs, MCConfig cfg, int resolution) {
  cfg.generations = MCConfig::time_to_generations(t, cfg.N);
  cfg.record_every = std::max<std::int64_t>(cfg.generations, 1);
  const MCSummary s = mc_simulate(sd.model, cfg, x);
  auto m = spectral_moments(sd, x, t, cutoffs, resolution);
  MomentComparison out;
  out.mass = m.back();
  m.pop_back();
  out.spectral = m;
  out.mc = s.mean.back();
  for (int i = 0; i < s.dim; ++i) out.standard_error.push_back(s.standard_error(s.mean.size() - 1, i));
  return out;
}

/// |E_spectral[Y_i] - E_MC[Y_i]| in units of the MC standard error, each required <= 3.
inline ValidationReport validate_mc_moments(const SpectralDecomposition& sd, const SimplexPoint& x, double t,
                                    DensityCutoffs cutoffs, const MCConfig& cfg, int resolution = 60) {
  const auto c = compare_mc_moments(sd, x, t, cutoffs, cfg, resolution);
  ValidationReport rep{"mc", {}};
  for (std::size_t i = 0; i < c.spectral.size(); ++i)
    rep.add("|E[Y_" + std::to_string(i + 1) + "] spectral - MC| / SE", std::abs(c.spectral[i] - c.mc[i]) / c.standard_error[i],
            3.0);
  return rep;
}

/// int p(s;x,z) p(t;z,y) dz against p(s+t;x,y) at random interior pairs.
inline double chapman_kolmogorov_error(const SpectralDecomposition& sd, double s, double t, int pairs,
                                       std::uint64_t seed, int resolution) {
  const DensityCutoffs cut{sd.size(), sd.truncation};
  const SimplexQuadrature Q(sd.model.theta(), resolution);
  // p(t; z, y) needs the modes at every node z as initial point
  std::vector<std::vector<double>> wz(Q.size());
  parallel_for(Q.size(), [&](std::size_t k) { wz[k] = mode_values(sd, Q.points()[k], sd.size(), sd.truncation); });
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (int k = 0; k < pairs; ++k) {
    const SimplexPoint x = random_interior_point(rng, sd.model.K(), 0.05), y = random_interior_point(rng, sd.model.K(), 0.05);
    const DensityEvaluator ex(sd, x, cut);
    const auto wy = mode_values(sd, y, sd.size(), sd.truncation);
    const double pi_y = std::exp(log_neutral_stationary(sd.model, y) + 0.5 * mean_fitness(sd.model, y));
    long double integral = 0;
    for (std::size_t j = 0; j < Q.size(); ++j) {
      const SimplexPoint& z = Q.points()[j];
      long double series = 0;
      for (std::size_t n = 0; n < sd.size(); ++n) series += std::exp(-sd.eigenvalues(n) * t) * wz[j][n] * wy[n];
      const double p_zy = static_cast<double>(series) * pi_y * std::exp(-0.5 * mean_fitness(sd.model, z));
      integral += Q.kernel_weights()[j] * ex.ratio(s, z) * p_zy;
    }
    const double direct = ex.value(s + t, y);
    worst = std::max(worst, std::abs(static_cast<double>(integral) - direct) / std::abs(direct));
  }
  return worst;
}

inline ValidationReport validate_chapman(const SpectralDecomposition& sd, double s, double t, int pairs,
                                         std::uint64_t seed, int resolution = 40, double tol = 2e-3) {
  ValidationReport rep{"chapman", {}};
  rep.add("max rel |int p(s)p(t) - p(s+t)|", chapman_kolmogorov_error(sd, s, t, pairs, seed, resolution), tol);
  return rep;
}

}  // namespace wfspec
