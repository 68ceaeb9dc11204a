/*
 * Copyright 2026 The aprank Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "aprank/ranking_core.h"

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aprank/errors.h"
#include "test_util.h"

namespace aprank {
namespace {

TEST(HeavisideTest, StrictAtZero) {
  EXPECT_EQ(Heaviside(0.3), 1.0);
  EXPECT_EQ(Heaviside(0.0), 0.0);
  EXPECT_EQ(Heaviside(-0.0), 0.0);
  EXPECT_EQ(Heaviside(-0.3), 0.0);
}

TEST(DescendingRankTest, Examples) {
  const std::vector<double> a{0.8, 0.7};
  const std::vector<double> b{0.9, 0.8};
  const std::vector<double> c{0.5, 0.5};
  EXPECT_EQ(DescendingRank(0.9, a), 1u);
  EXPECT_EQ(DescendingRank(0.7, b), 3u);
  EXPECT_EQ(DescendingRank(0.5, c), 1u);
  EXPECT_EQ(DescendingRank(0.5, {}), 1u);
}

TEST(DescendingRankTest, BoundedPermutationAndMonotoneInvariant) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 17;
    std::vector<double> pool = testing::UniformVector(rng, n);
    const double s = testing::UniformVector(rng, 1)[0];
    const std::size_t r = DescendingRank(s, pool);
    ASSERT_GE(r, 1u);
    ASSERT_LE(r, n + 1);
    std::shuffle(pool.begin(), pool.end(), rng);
    ASSERT_EQ(DescendingRank(s, pool), r);
    // exp is strictly increasing.
    std::vector<double> mapped(pool.size());
    std::transform(pool.begin(), pool.end(), mapped.begin(),
                   [](double v) { return std::exp(3.0 * v); });
    ASSERT_EQ(DescendingRank(std::exp(3.0 * s), mapped), r);
  }
}

TEST(PartitionQueryTest, Examples) {
  {
    const std::vector<double> row{1.0, 0.8, 0.3};
    const std::vector<std::uint8_t> rel{1, 1, 0};
    const QueryContext q = PartitionQuery(row, rel, 0);
    EXPECT_EQ(q.positives, std::vector<double>({0.8}));
    EXPECT_EQ(q.negatives, std::vector<double>({0.3}));
  }
  {
    const std::vector<double> row{0.5};
    const std::vector<std::uint8_t> rel{1};
    const QueryContext q = PartitionQuery(row, rel, 0);
    EXPECT_TRUE(q.positives.empty());
    EXPECT_TRUE(q.negatives.empty());
    EXPECT_TRUE(q.skipped());
  }
  {
    const std::vector<double> row{0.9, 0.2, 0.7, 0.1};
    const std::vector<std::uint8_t> rel{1, 0, 1, 0};
    const QueryContext q = PartitionQuery(row, rel, 0);
    EXPECT_EQ(q.positives, std::vector<double>({0.7}));
    EXPECT_EQ(q.negatives, std::vector<double>({0.2, 0.1}));
  }
}

TEST(PartitionQueryTest, SelfDroppedEvenWhenMarkedIrrelevant) {
  const std::vector<double> row{0.9, 0.2, 0.7};
  const std::vector<std::uint8_t> rel{0, 0, 1};
  const QueryContext q = PartitionQuery(row, rel, 0);
  EXPECT_EQ(q.positives, std::vector<double>({0.7}));
  EXPECT_EQ(q.negatives, std::vector<double>({0.2}));
}

TEST(PartitionQueryTest, SizesAlwaysSumToRowMinusOne) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const std::vector<double> row = testing::UniformVector(rng, n);
    std::vector<std::uint8_t> rel(n);
    for (auto& r : rel) r = coin(rng) ? 1 : 0;
    const std::size_t self = trial % n;
    const QueryContext q = PartitionQuery(row, rel, self);
    ASSERT_EQ(q.positives.size() + q.negatives.size(), n - 1);
    const QueryIndices idx = PartitionQueryIndices(rel, self);
    ASSERT_EQ(idx.positives.size(), q.positives.size());
    for (std::size_t k = 0; k < idx.positives.size(); ++k) {
      ASSERT_EQ(row[idx.positives[k]], q.positives[k]);
    }
    for (std::size_t k = 0; k < idx.negatives.size(); ++k) {
      ASSERT_EQ(row[idx.negatives[k]], q.negatives[k]);
    }
  }
}

TEST(PartitionQueryTest, RejectsBadShapes) {
  const std::vector<double> row{0.1, 0.2};
  const std::vector<std::uint8_t> rel{1};
  EXPECT_THROW(PartitionQuery(row, rel, 0), StructuralError);
  const std::vector<std::uint8_t> rel2{1, 0};
  EXPECT_THROW(PartitionQuery(row, rel2, 2), StructuralError);
}

TEST(RelevanceMatrixTest, FromGroups) {
  const std::vector<int> groups{0, 1, 0};
  const RelevanceMatrix y = RelevanceMatrix::FromGroups(groups);
  EXPECT_EQ(y.size(), 3u);
  EXPECT_TRUE(y.relevant(0, 2));
  EXPECT_TRUE(y.relevant(1, 1));
  EXPECT_FALSE(y.relevant(0, 1));
  EXPECT_TRUE(y.symmetric());
}

TEST(RelevanceMatrixTest, RejectsBadEntries) {
  EXPECT_THROW(RelevanceMatrix(2, {1, 0, 1}), StructuralError);
  EXPECT_THROW(RelevanceMatrix(1, {2}), StructuralError);
  EXPECT_FALSE(RelevanceMatrix(2, {1, 1, 0, 1}).symmetric());
}

TEST(ScoredListTest, Validate) {
  EXPECT_THROW((ScoredList{{0.1}, {1, 0}}.Validate()), StructuralError);
  EXPECT_THROW((ScoredList{{0.1}, {2}}.Validate()), StructuralError);
  EXPECT_THROW((ScoredList{{NAN}, {1}}.Validate()), StructuralError);
  EXPECT_NO_THROW((ScoredList{{0.1, 0.2}, {1, 0}}.Validate()));
  EXPECT_EQ((ScoredList{{0.1, 0.2, 0.3}, {1, 0, 1}}.num_positives()), 2u);
}

}  // namespace
}  // namespace aprank
