#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <wfspec/multivariate_jacobi.hpp>
#include <wfspec/oracles.hpp>

using namespace wfspec;

namespace {
const std::vector<std::vector<double>> kThetas{{0.01, 0.02, 0.03}, {0.7, 1.3, 2.1}, {0.5, 0.8, 1.1, 0.3}};
}

TEST(MultiJacobi, OrthogonalUnderDirichletKernel) {
  for (const auto& th : kThetas) {
    const MultiJacobiBasis basis(th, 4);
    const SimplexQuadrature Q(th, 30);
    const auto& E = basis.enumeration();
    for (std::size_t a = 0; a < E.size(); ++a)
      for (std::size_t b = 0; b < E.size(); ++b) {
        const double g = Q.integrate_kernel(
            [&](const SimplexPoint& x) { return eval_P(E[a], basis, x) * eval_P(E[b], basis, x); });
        const double scale = std::sqrt(basis.norm(E[a]) * basis.norm(E[b]));
        EXPECT_NEAR(g / scale, a == b ? 1.0 : 0.0, 1e-10) << E[a] << " " << E[b];
      }
  }
}

TEST(MultiJacobi, EvaluatorMatchesDirect) {
  const MultiJacobiBasis basis({0.3, 0.5, 0.9, 1.2}, 6);
  const BasisEvaluator ev(basis, 6);
  const SimplexPoint x({0.1, 0.3, 0.25});
  const auto P = ev(x);
  for (std::size_t p = 0; p < P.size(); ++p) EXPECT_NEAR(P[p], eval_P(basis.enumeration()[p], basis, x), 1e-12);
}

// G entries against the quadrature projection <x_i P_n, P_m> / C_m.
TEST(MultiJacobi, RecurrenceEntriesByProjection) {
  for (const auto& th : kThetas) {
    const MultiJacobiBasis basis(th, 4);
    const SimplexQuadrature Q(th, 30);
    const auto& E = basis.enumeration();
    for (std::size_t a = 0; a < E.size(); ++a) {
      if (E[a].total() > 3) continue;
      for (std::size_t b = 0; b < E.size(); ++b)
        for (int i = 0; i < basis.dimension(); ++i) {
          const double proj = Q.integrate_kernel([&](const SimplexPoint& x) {
            return x[i] * eval_P(E[a], basis, x) * eval_P(E[b], basis, x);
          }) / basis.norm(E[b]);
          EXPECT_NEAR(recurrence_entry(E[a], E[b], i, basis), proj, 1e-10) << "i=" << i << " " << E[a] << " " << E[b];
        }
    }
  }
}

TEST(MultiJacobi, RecurrenceReconstructsProduct) {
  const MultiJacobiBasis basis({0.01, 0.02, 0.03}, 12);
  const MultiJacobiBasis rows({0.01, 0.02, 0.03}, 8);
  const SimplexPoint x({0.2, 0.35});
  for (std::size_t i = 0; i < 2; ++i)
    for (const auto& n : rows.enumeration().indices()) {
      double s = 0;
      for_each_recurrence_entry<double>(n, i, basis, [&](const std::vector<int>& m, double v) {
        s += v * eval_P(IndexVector(m), basis, x);
      });
      const double lhs = x[i] * eval_P(n, basis, x);
      EXPECT_NEAR(s, lhs, 1e-10 * (1 + std::abs(lhs)));
    }
}

TEST(MultiJacobi, GMatricesCommuteOnInteriorBlock) {
  const MultiJacobiBasis basis({0.01, 0.02, 0.03, 0.04}, 6);
  const auto G0 = build_G(0, basis, 2).entries, G1 = build_G(1, basis, 2).entries, G2 = build_G(2, basis, 2).entries;
  const std::size_t inner = basis.enumeration().size();  // |n| <= 6 is exact with pad 2
  for (const auto& [A, B] : {std::pair{&G0, &G1}, std::pair{&G0, &G2}, std::pair{&G1, &G2}}) {
    const auto AB = *A * *B, BA = *B * *A;
    for (std::size_t r = 0; r < inner; ++r)
      for (std::size_t c = 0; c < inner; ++c) EXPECT_NEAR(AB.get(r, c), BA.get(r, c), 1e-13);
  }
}

TEST(MultiJacobi, BandStructure) {
  const MultiJacobiBasis basis({0.5, 0.5, 1.0}, 8);
  const auto G = build_G(1, basis, 0);
  for (std::size_t r = 0; r < G.entries.rows(); ++r)
    for (const auto& [c, v] : G.entries.row(r)) {
      EXPECT_LE(std::abs(basis.enumeration()[r].total() - G.enumeration->operator[](c).total()), 1);
      EXPECT_NE(v, 0.0);
    }
}

TEST(MultiJacobi, RelativeNormsMatchLogNorms) {
  const MultiJacobiBasis basis({0.01, 0.02, 0.03}, 20);
  const auto ln = basis.log_norms();
  const auto rel = basis.relative_norms<double>();
  for (std::size_t p = 0; p < ln.size(); ++p) EXPECT_NEAR(rel[p] / std::exp(ln[p] - ln[0]), 1.0, 1e-11);
}

TEST(MultiJacobi, TripletsExport) {
  const MultiJacobiBasis basis({1, 1, 1}, 1);
  std::ostringstream os;
  build_G(0, basis, 0).write_triplets(os);
  EXPECT_NE(os.str().find("row,col,value"), std::string::npos);
}

TEST(MultiJacobi, Errors) {
  const MultiJacobiBasis basis({1, 1, 1}, 3);
  EXPECT_THROW(eval_P(IndexVector({1, 1, 1}), basis, SimplexPoint({0.2, 0.2})), ParameterDomainError);
  EXPECT_THROW(build_G(2, basis, 0), ParameterDomainError);
  EXPECT_THROW(MultiJacobiBasis({1, 0, 1}, 3), ParameterDomainError);
}
