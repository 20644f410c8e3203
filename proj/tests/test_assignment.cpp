#include "symplane/assignment.hpp"
#include "symplane/error.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace symplane;

TEST(Assign, IdentityFavoring) {
  CostMatrix c(2, 2);
  c << 0, 5, 5, 0;
  const Assignment a = assign(c);
  ASSERT_EQ(a.pairs.size(), 2u);
  EXPECT_EQ(a.pairs[0].row, 0u);
  EXPECT_EQ(a.pairs[0].col, 0u);
  EXPECT_EQ(a.pairs[1].col, 1u);
  EXPECT_EQ(a.total_cost(), 0.0);
}

TEST(Assign, SingleRow) {
  CostMatrix c(1, 3);
  c << 3, 1, 2;
  const Assignment a = assign(c);
  ASSERT_EQ(a.pairs.size(), 1u);
  EXPECT_EQ(a.pairs[0].col, 1u);
  EXPECT_EQ(a.total_cost(), 1.0);
  EXPECT_EQ(a.unmatched_cols, (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(a.unmatched_rows.empty());
}

TEST(Assign, TallMatrix) {
  CostMatrix c(3, 1);
  c << 4, 2, 9;
  const Assignment a = assign(c);
  ASSERT_EQ(a.pairs.size(), 1u);
  EXPECT_EQ(a.pairs[0].row, 1u);
  EXPECT_EQ(a.unmatched_rows, (std::vector<std::size_t>{0, 2}));
}

TEST(Assign, Empty) {
  EXPECT_TRUE(assign(CostMatrix(0, 0)).pairs.empty());
  const Assignment a = assign(CostMatrix(0, 3));
  EXPECT_TRUE(a.pairs.empty());
  EXPECT_EQ(a.unmatched_cols.size(), 3u);
}

TEST(Assign, RejectsNonFinite) {
  CostMatrix c = CostMatrix::Zero(2, 2);
  c(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(assign(c), Error);
}

TEST(Assign, MatchesBruteForce) {
  CounterRng rng(50);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = 1 + int(rng.below(6)), cols = 1 + int(rng.below(6));
    CostMatrix c(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) c(i, j) = rng.uniform(-5, 10);
    const Assignment a = assign(c);
    EXPECT_EQ(a.pairs.size(), std::size_t(std::min(rows, cols)));
    std::set<std::size_t> r, k;
    for (const auto& p : a.pairs) {
      EXPECT_TRUE(r.insert(p.row).second);
      EXPECT_TRUE(k.insert(p.col).second);
      EXPECT_EQ(p.cost, c(long(p.row), long(p.col)));
    }
    EXPECT_EQ(r.size() + a.unmatched_rows.size(), std::size_t(rows));
    EXPECT_EQ(k.size() + a.unmatched_cols.size(), std::size_t(cols));
    EXPECT_NEAR(a.total_cost(), oracle::brute_force_assignment(c), 1e-9);
  }
}

TEST(MeanMatchedLoss, Examples) {
  CostMatrix c(1, 1);
  c << 3;
  EXPECT_EQ(mean_matched_loss(c, assign(c)), 3.0);
  CostMatrix d(2, 2);
  d << 1, 9, 9, 3;
  EXPECT_EQ(mean_matched_loss(d, assign(d)), 2.0);
  EXPECT_THROW(mean_matched_loss(d, Assignment{}), Error);
}

TEST(MeanMatchedLoss, RandomEqualsBruteForceMean) {
  CounterRng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    CostMatrix c(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) c(i, j) = rng.uniform(0, 1);
    EXPECT_NEAR(mean_matched_loss(c, assign(c)), oracle::brute_force_assignment(c) / 4, 1e-12);
  }
}
