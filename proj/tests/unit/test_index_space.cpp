#include <gtest/gtest.h>

#include <set>

#include <wfspec/index_space.hpp>

using namespace wfspec;

TEST(IndexSpace, BasisSizeK3) {
  EXPECT_EQ(basis_size(3, 40), 861u);
  EXPECT_EQ(basis_size(3, 0), 1u);
  for (int D = 0; D <= 30; ++D) EXPECT_EQ(basis_size(3, D), static_cast<std::uint64_t>((D + 1) * (D + 2) / 2));
}

TEST(IndexSpace, CountAtDegree) {
  for (int l = 0; l <= 12; ++l) EXPECT_EQ(count_at_degree(3, l), static_cast<std::uint64_t>(l + 1));
  EXPECT_EQ(count_at_degree(4, 3), 10u);
  EXPECT_EQ(count_at_degree(2, 7), 1u);
}

TEST(IndexSpace, GradedLexOrderK3) {
  const BasisEnumeration e(3, 2);
  const std::vector<std::vector<int>> want{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  ASSERT_EQ(e.size(), want.size());
  for (std::size_t p = 0; p < want.size(); ++p) EXPECT_EQ(e[p].degrees(), want[p]);
}

TEST(IndexSpace, PositionOfDegreeTenIndex) {
  // (8,2) sits in the degree-10 block after U(9) = 55 lower indices and 8 earlier ones
  const BasisEnumeration e(3, 40);
  EXPECT_EQ(e.position(IndexVector({8, 2})), 63u);
  EXPECT_EQ(e.degree_begin(10), 55u);
}

TEST(IndexSpace, RoundTripAndStrictOrder) {
  for (int K : {2, 3, 4, 5}) {
    const BasisEnumeration e(K, 7);
    EXPECT_EQ(e.size(), basis_size(K, 7));
    for (std::size_t p = 0; p < e.size(); ++p) {
      EXPECT_EQ(e.position(e[p]), p);
      if (p) EXPECT_LT(e[p - 1], e[p]);
    }
  }
}

TEST(IndexSpace, Errors) {
  const BasisEnumeration e(3, 4);
  EXPECT_THROW(e.position(IndexVector({5, 0})), ParameterDomainError);
  EXPECT_THROW(e.position(std::vector<int>{1, 1, 1}), ParameterDomainError);
  EXPECT_EQ(e.find({5, 0}), e.size());
  EXPECT_THROW(IndexVector({-1, 2}), ParameterDomainError);
  EXPECT_THROW(binomial(200, 100), ParameterDomainError);
}

TEST(IndexSpace, TailSumAndStr) {
  const IndexVector n({3, 1, 4});
  EXPECT_EQ(n.total(), 8);
  EXPECT_EQ(n.tail_sum(1), 5);
  EXPECT_EQ(n.tail_sum(3), 0);
  EXPECT_EQ(n.str(), "(3,1,4)");
}

TEST(IndexSpace, HashDistinguishesIndices) {
  const BasisEnumeration e(4, 6);
  std::set<std::size_t> hashes;
  for (const auto& n : e.indices()) hashes.insert(IndexVectorHash{}(n.degrees()));
  EXPECT_GT(hashes.size(), e.size() * 9 / 10);
}
