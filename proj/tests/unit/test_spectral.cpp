#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include <wfspec/oracles.hpp>
#include <wfspec/spectral.hpp>
#include <wfspec/validation.hpp>

using namespace wfspec;

namespace {

const std::vector<std::vector<double>> kSigma1{{12, 14, 15}, {14, 11, 13}, {15, 13, 0}};
const std::vector<double> kTheta{0.01, 0.02, 0.03};

ModelParams sigma1_model(double f = 1.0) { return ModelParams(kTheta, kSigma1).scaled_selection(f); }

AssemblyOptions double_opts() {
  AssemblyOptions o;
  o.precision = PrecisionMode::double_precision;
  return o;
}

Eigen::MatrixXd dense(const SparseRows<double>& M) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M.rows(), M.cols());
  for (std::size_t r = 0; r < M.rows(); ++r)
    for (const auto& [c, v] : M.row(r)) A(r, c) = v;
  return A;
}

// M_nm = lambda_n delta_nm + <Q P_n, P_m> / C_m, by quadrature, bypassing the G products
Eigen::MatrixXd quadrature_operator(const ModelParams& p, int D, int res) {
  const MultiJacobiBasis basis(p.theta(), D);
  const SimplexQuadrature Q(p.theta(), res);
  const BasisEvaluator ev(basis, D);
  const std::size_t U = basis.enumeration().size();
  std::vector<std::vector<double>> P(Q.size());
  std::vector<double> q(Q.size());
  for (std::size_t k = 0; k < Q.size(); ++k) {
    P[k] = ev(Q.points()[k]);
    q[k] = q_direct(p, Q.points()[k]);
  }
  const auto ln = basis.log_norms();
  Eigen::MatrixXd M(U, U);
  for (std::size_t n = 0; n < U; ++n)
    for (std::size_t m = 0; m < U; ++m) {
      long double s = 0;
      for (std::size_t k = 0; k < Q.size(); ++k) s += Q.kernel_weights()[k] * q[k] * P[k][n] * P[k][m];
      M(n, m) = static_cast<double>(s) / std::exp(ln[m]);
      if (n == m) M(n, m) += neutral_eigenvalue(basis.enumeration()[n].total(), p.theta_sum());
    }
  return M;
}

std::vector<double> sorted_real_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  std::vector<double> ev;
  for (Eigen::Index i = 0; i < A.rows(); ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST(Spectral, NeutralSpectrumExact) {
  EXPECT_LE(neutral_spectrum_error(kTheta, 10), 1e-10);
  EXPECT_LE(neutral_spectrum_error({0.5, 0.5, 1.0, 2.0}, 6), 1e-10);
}

TEST(Spectral, NeutralIndependentOfTruncation) {
  const auto p = ModelParams::neutral(kTheta);
  const auto a = decompose(p, 6, double_opts()), b = decompose(p, 10, double_opts());
  for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a.eigenvalues(n), b.eigenvalues(n), 1e-12);
}

TEST(Spectral, SimilarityMatchesNonsymmetricSolve) {
  for (int D : {4, 7, 10}) {
    const auto om = assemble_M(sigma1_model(), D, double_opts());
    const auto sd = eigensolve(om);
    const auto ref = sorted_real_eigenvalues(dense(om.M));
    for (std::size_t n = 0; n < sd.size(); ++n)
      EXPECT_NEAR(sd.eigenvalues(n), ref[n], 1e-8 * std::max(1.0, std::abs(ref[n]))) << "D=" << D << " n=" << n;
  }
}

TEST(Spectral, AssemblyMatchesQuadratureOperator) {
  for (const auto& [p, D] : {std::pair{ModelParams({0.3, 0.7}, {{4, -2}, {-2, 0}}), 14},
                             std::pair{ModelParams({0.4, 0.5, 0.9}, {{3, 1, -2}, {1, 2, 4}, {-2, 4, 0}}), 6}}) {
    const Eigen::MatrixXd A = dense(assemble_M(p, D, double_opts()).M);
    const Eigen::MatrixXd B = quadrature_operator(p, D, 24);
    const double scale = B.cwiseAbs().maxCoeff();
    EXPECT_LE((A - B).cwiseAbs().maxCoeff() / scale, 1e-11) << "K=" << p.K();
  }
}

TEST(Spectral, TwoAlleleEigenvaluesFromIndependentPath) {
  const ModelParams p({0.3, 0.7}, {{4, -2}, {-2, 0}});
  const auto sd = decompose(p, 14, double_opts());
  const auto ref = sorted_real_eigenvalues(quadrature_operator(p, 14, 24));
  for (std::size_t n = 0; n < sd.size(); ++n) EXPECT_NEAR(sd.eigenvalues(n), ref[n], 1e-8 * std::max(1.0, ref[n]));
}

TEST(Spectral, PaddingBeyondTwoChangesNothing) {
  AssemblyOptions a = double_opts(), b = double_opts();
  a.pad = 2;
  b.pad = 6;
  const auto Ma = assemble_M(sigma1_model(), 8, a).M, Mb = assemble_M(sigma1_model(), 8, b).M;
  for (std::size_t r = 0; r < Ma.rows(); ++r)
    for (std::size_t c = 0; c < Ma.cols(); ++c) EXPECT_NEAR(Ma.get(r, c), Mb.get(r, c), 1e-12 * (1 + std::abs(Mb.get(r, c))));
  a.pad = 1;
  EXPECT_THROW(assemble_M(sigma1_model(), 8, a), ParameterDomainError);
}

TEST(Spectral, BandRespect) {
  const auto om = assemble_M(sigma1_model(), 12, double_opts());
  for (std::size_t r = 0; r < om.size(); ++r)
    for (const auto& [c, v] : om.M.row(r)) {
      const int gap = std::abs((*om.enumeration)[r].total() - (*om.enumeration)[c].total());
      if (gap > 4) EXPECT_EQ(v, 0.0);
    }
}

TEST(Spectral, DetailedBalanceDefect) {
  EXPECT_LE(detailed_balance_defect(assemble_M(sigma1_model(), 12, double_opts())), 1e-9);
}

TEST(Spectral, AsymmetricOperatorRejected) {
  SparseRows<double> M(2, 2);
  M.set_row(0, {{0, 1.0}, {1, 3.0}});
  M.set_row(1, {{0, 1.0}, {1, 2.0}});
  EXPECT_THROW(detail::symmetrize_with(M, {1.0, 1.0}, 1e-9), DetailedBalanceError);
}

TEST(Spectral, EigenpairResidualsAndOrthogonality) {
  const auto om = assemble_M(sigma1_model(), 20, double_opts());
  const auto sd = eigensolve(om);
  const Eigen::MatrixXd M = dense(om.M);
  for (std::size_t n = 0; n < 20; ++n) {
    const Eigen::RowVectorXd u = sd.coefficients.row(n);
    EXPECT_LE((u * M - sd.eigenvalues(n) * u).norm() / ((1 + std::abs(sd.eigenvalues(n))) * u.norm()), 1e-10);
  }
  const std::size_t U = sd.size();
  Eigen::VectorXd C(U);
  for (std::size_t m = 0; m < U; ++m) C(m) = std::exp(sd.log_norms[m]);
  const Eigen::MatrixXd gram = sd.coefficients * C.asDiagonal() * sd.coefficients.transpose();
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(U, U)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Spectral, SignConvention) {
  const auto sd = decompose(sigma1_model(), 10, double_opts());
  for (std::size_t n = 0; n < sd.size(); ++n) {
    Eigen::Index arg;
    sd.coefficients.row(n).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(sd.coefficients(n, arg), 0.0);
  }
}

TEST(Spectral, GroundStateIsConstant) {
  const auto sd = decompose(sigma1_model(), 30, double_opts());
  std::mt19937_64 rng(8);
  std::vector<double> b;
  for (int k = 0; k < 20; ++k) b.push_back(eval_B(0, sd, random_interior_point(rng, 3, 0.05)));
  const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
  EXPECT_LE((*hi - *lo) / *hi, 1e-9);
  EXPECT_LE(std::abs(sd.eigenvalues(0)), 1e-10);
}

TEST(Spectral, LambdaZeroDecreasesExtended) {
  AssemblyOptions ext;
  ext.precision = PrecisionMode::extended;
  double prev = INFINITY;
  for (int D : {6, 8, 10, 12}) {
    const auto sd = decompose(sigma1_model(), D, ext);
    EXPECT_TRUE(sd.extended);
    EXPECT_EQ(sd.bits, 128u);
    EXPECT_GE(sd.eigenvalues(0), 0.0);
    EXPECT_LE(sd.eigenvalues(0), prev);
    prev = sd.eigenvalues(0);
  }
}

TEST(Spectral, ExtendedAgreesWithDouble) {
  AssemblyOptions ext;
  ext.precision = PrecisionMode::extended;
  const auto a = decompose(sigma1_model(), 12, double_opts());
  const auto b = decompose(sigma1_model(), 12, ext);
  for (std::size_t n = 1; n < a.size(); ++n) EXPECT_NEAR(a.eigenvalues(n) / b.eigenvalues(n), 1.0, 1e-10);
  ext.extended_bits = 256;
  const auto c = decompose(sigma1_model(), 8, ext);
  EXPECT_EQ(c.bits, 256u);
  EXPECT_NEAR(c.eigenvalues(5), decompose(sigma1_model(), 8, double_opts()).eigenvalues(5), 1e-9);
}

TEST(Spectral, AutomaticPrecisionThreshold) {
  AssemblyOptions opt;
  EXPECT_FALSE(uses_extended_precision(sigma1_model(), opt));
  EXPECT_TRUE(uses_extended_precision(sigma1_model(4.0), opt));
  opt.extended_threshold = 10;
  EXPECT_TRUE(uses_extended_precision(sigma1_model(), opt));
  opt.extended_bits = 64;
  opt.precision = PrecisionMode::extended;
  EXPECT_THROW(assemble_M(sigma1_model(), 3, opt), ConfigError);
}

// sigma = eps sigma_1 approaches the neutral spectrum as eps shrinks
TEST(Spectral, NeutralLimitContinuity) {
  const auto neutral = decompose(ModelParams::neutral(kTheta), 10, double_opts());
  const auto a = decompose(sigma1_model(1e-3), 10, double_opts()), b = decompose(sigma1_model(1e-4), 10, double_opts());
  for (std::size_t n = 1; n < neutral.size(); ++n) {
    const double ea = std::abs(a.eigenvalues(n) - neutral.eigenvalues(n));
    const double eb = std::abs(b.eigenvalues(n) - neutral.eigenvalues(n));
    EXPECT_LT(eb, ea) << n;
    EXPECT_LT(ea, 0.1);
  }
}

TEST(Spectral, ConvergenceTableRows) {
  std::vector<IndexVector> m{IndexVector({8, 2}), IndexVector({0, 1})};
  const auto rows = convergence_table(sigma1_model(), {0, 3, 70}, {8, 12}, m, double_opts());
  // n = 70 exceeds U(8) = 45, so only D = 12 has it
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].D, 8);
  EXPECT_EQ(rows[0].u.size(), 1u);  // (8,2) has degree 10 > 8
  EXPECT_EQ(rows.back().n, 70u);
  EXPECT_EQ(rows.back().u.size(), 2u);
}

TEST(Spectral, TruncationStabilization) {
  const auto a = decompose(sigma1_model(), 36, double_opts()), b = decompose(sigma1_model(), 40, double_opts());
  EXPECT_LE(std::abs(b.eigenvalues(75) - a.eigenvalues(75)) / b.eigenvalues(75), 1e-4);
}
