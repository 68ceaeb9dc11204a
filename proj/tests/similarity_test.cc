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

#include "aprank/similarity.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "aprank/errors.h"
#include "test_util.h"

namespace aprank {
namespace {

using ::aprank::testing::RandomPatches;

// Sort-and-average composition of the whole video similarity, written
// without the library's top-K helpers.
double OracleVideoSimilarity(const PatchEmbeddings& a, const PatchEmbeddings& b,
                             std::size_t ks, std::size_t kt) {
  auto cosine = [](std::span<const double> x, std::span<const double> y) {
    double dot = 0.0;
    double nx = 0.0;
    double ny = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      dot += x[d] * y[d];
      nx += x[d] * x[d];
      ny += y[d] * y[d];
    }
    return dot / std::sqrt(nx * ny);
  };
  auto top_mean = [](std::vector<double> v, std::size_t k) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return std::accumulate(v.begin(), v.begin() + static_cast<long>(k), 0.0) /
           static_cast<double>(k);
  };
  double total = 0.0;
  for (std::size_t x = 0; x < a.frames(); ++x) {
    std::vector<double> row;
    for (std::size_t y = 0; y < b.frames(); ++y) {
      double m = 0.0;
      for (std::size_t i = 0; i < a.patches(); ++i) {
        std::vector<double> cand;
        for (std::size_t j = 0; j < b.patches(); ++j) {
          cand.push_back(cosine(a.patch(x, i), b.patch(y, j)));
        }
        m += top_mean(cand, ks);
      }
      row.push_back(m / static_cast<double>(a.patches()));
    }
    total += top_mean(row, kt);
  }
  return total / static_cast<double>(a.frames());
}

TEST(CosineTest, Examples) {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  const std::vector<double> c{0.0, 3.0};
  EXPECT_NEAR(Cosine(a, b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(Cosine(a, c), 0.0);
  EXPECT_THROW(Cosine(a, std::vector<double>{0.0, 0.0}), DegenerateInputError);
  EXPECT_THROW(Cosine(a, std::vector<double>{1.0}), StructuralError);
}

TEST(PatchSimilarityTest, SelfDiagonalIsOne) {
  std::mt19937_64 rng(1);
  const PatchEmbeddings a = RandomPatches(rng, 3, 4, 5);
  const SimilarityTensor s = PatchSimilarity(a, a);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s.at(x, i, i, x), 1.0, 1e-15);
  }
}

TEST(PatchSimilarityTest, HandCosine) {
  const PatchEmbeddings a(1, 1, 2, {1.0, 0.0});
  const PatchEmbeddings b(1, 2, 2, {1.0, 1.0, 0.0, 2.0});
  const SimilarityTensor s = PatchSimilarity(a, b);
  EXPECT_NEAR(s.at(0, 0, 0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(s.at(0, 0, 1, 0), 0.0);
  EXPECT_THROW(PatchSimilarity(a, PatchEmbeddings(1, 1, 3, {1, 0, 0})), StructuralError);
}

TEST(TopKCountTest, Examples) {
  EXPECT_EQ(TopKCount(0.03, 28), 1u);
  EXPECT_EQ(TopKCount(1.0, 7), 7u);
  EXPECT_EQ(TopKCount(0.10, 9), 1u);
  EXPECT_EQ(TopKCount(0.0, 9), 1u);
  EXPECT_EQ(TopKCount(0.5, 6), 3u);
  EXPECT_EQ(TopKCount(0.35, 4), 1u);
}

TEST(TopKTest, TieBreakAndIndexOrderSum) {
  const std::vector<double> v{0.5, 0.9, 0.5, 0.9, 0.1};
  EXPECT_EQ(TopKIndices(v, 3), (std::vector<std::size_t>{1, 3, 0}));
  EXPECT_EQ(TopKSum(v, 5), 0.5 + 0.9 + 0.5 + 0.9 + 0.1);
  EXPECT_EQ(TopKSum(v, 1), 0.9);
  EXPECT_TRUE(TopKIndices(v, 0).empty());
  EXPECT_EQ(TopKIndices(v, 9).size(), 5u);
}

TEST(SpatialTopKChamferTest, HandRowContribution) {
  // One (x, i, ., y) row [0.9, 0.7, 0.5, 0.1]; other query patches see zeros.
  SimilarityTensor s(1, 4, 4, 1);
  const double row[4] = {0.9, 0.7, 0.5, 0.1};
  for (std::size_t j = 0; j < 4; ++j) s.at(0, 0, j, 0) = row[j];
  const Matrix m = SpatialTopKChamfer(s, 0.5);  // K = 2.
  EXPECT_NEAR(m(0, 0), 0.8 / 4.0, 1e-15);
}

TEST(SpatialTopKChamferTest, DegeneraciesBitExact) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    SimilarityTensor s(3, 4, 5, 2);
    for (double& v : s.data()) v = testing::UniformVector(rng, 1)[0];
    ASSERT_EQ(SpatialTopKChamfer(s, 0.0), ChamferSimilarity(s));
    // Full K is mean pooling over (i, j): row sums accumulated, then one
    // division by the entry count.
    const Matrix full = SpatialTopKChamfer(s, 1.0);
    for (std::size_t x = 0; x < 3; ++x) {
      for (std::size_t y = 0; y < 2; ++y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < 5; ++j) row += s.at(x, i, j, y);
          acc += row;
        }
        ASSERT_EQ(full(x, y), acc / 20.0);
      }
    }
  }
}

TEST(TemporalTopKChamferTest, Examples) {
  const Matrix m = Matrix::FromRows({{0.9, 0.1}, {0.5, 0.3}});
  EXPECT_NEAR(TemporalTopKChamfer(m, 0.0), 0.7, 1e-15);
  EXPECT_EQ(TemporalTopKChamfer(m, 0.0), TemporalChamfer(m));
  EXPECT_EQ(TemporalTopKChamfer(m, 1.0), MeanPooling(m));
  EXPECT_NEAR(MeanPooling(m), 0.45, 1e-15);
}

TEST(TemporalTopKChamferTest, DegeneraciesAndPermutation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = testing::UniformMatrix(rng, 5, 7);
    ASSERT_EQ(TemporalTopKChamfer(m, 0.0), TemporalChamfer(m));
    ASSERT_EQ(TemporalTopKChamfer(m, 1.0), MeanPooling(m));
    const double k3 = TemporalTopKChamfer(m, 3.0 / 7.0);
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix p(5, 7);
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 0; c < 7; ++c) p(r, perm[c]) = m(r, c);
    }
    // The top-K set is order-free; its sum can differ by rounding only.
    ASSERT_NEAR(TemporalTopKChamfer(p, 3.0 / 7.0), k3, 1e-15);
  }
}

TEST(AggregationTest, MonotoneInEveryEntry) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    SimilarityTensor s(2, 3, 3, 4);
    for (double& v : s.data()) v = testing::UniformVector(rng, 1)[0];
    const double base = TemporalTopKChamfer(SpatialTopKChamfer(s, 0.67), 0.5);
    const std::size_t idx = trial % s.data().size();
    s.data()[idx] += 0.3;
    ASSERT_GE(TemporalTopKChamfer(SpatialTopKChamfer(s, 0.67), 0.5), base - 1e-15);
  }
}

TEST(RefineTest, Examples) {
  std::mt19937_64 rng(5);
  const Matrix m = testing::UniformMatrix(rng, 4, 5);
  EXPECT_EQ(Refine(m, RefinerParams{}), m);
  RefinerParams affine;
  affine.kind = RefinerKind::kAffine;
  EXPECT_EQ(Refine(m, affine), m);
  affine.scale = 2.0;
  affine.bias = -0.5;
  EXPECT_EQ(Refine(Matrix(1, 1, 0.75), affine)(0, 0), 1.0);
  EXPECT_EQ(Refine(Matrix(1, 1, 0.9), affine)(0, 0), 1.0);
  EXPECT_EQ(Refine(Matrix(1, 1, -0.9), affine)(0, 0), -1.0);
}

TEST(RefineTest, DownsampleShape) {
  RefinerParams r;
  r.kind = RefinerKind::kAffine;
  r.downsample = 2;
  const Matrix m = Matrix::FromRows({{1, 2, 3}, {3, 4, 5}, {5, 6, 7}});
  RefinerParams wide = r;
  wide.scale = 0.1;
  const Matrix out = Refine(m, wide);
  ASSERT_EQ(out.rows(), 2u);
  ASSERT_EQ(out.cols(), 2u);
  EXPECT_NEAR(out(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(out(1, 1), 0.7, 1e-15);
  EXPECT_NEAR(out(0, 1), 0.4, 1e-15);
}

TEST(RefineTest, DeltaConvIsTanhOfInput) {
  std::mt19937_64 rng(6);
  const Matrix m = testing::UniformMatrix(rng, 3, 4);
  const Matrix out = Refine(m, RefinerParams::DeltaConv(3));
  for (std::size_t k = 0; k < m.size(); ++k) {
    EXPECT_DOUBLE_EQ(out.data()[k], std::tanh(m.data()[k]));
  }
  RefinerParams bad = RefinerParams::DeltaConv(3);
  bad.conv_size = 2;
  EXPECT_THROW(bad.Validate(), ParameterError);
}

TEST(VideoSimilarityTest, MatchesCompositionOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const PatchEmbeddings a = RandomPatches(rng, 2 + trial % 3, 3, 4);
    const PatchEmbeddings b = RandomPatches(rng, 3, 4, 4);
    const AggregationParams p{0.5, 0.34};
    const double got = VideoSimilarity(a, b, p, {});
    ASSERT_NEAR(got, OracleVideoSimilarity(a, b, TopKCount(0.5, 4), TopKCount(0.34, 3)), 1e-14);
  }
}

TEST(VideoSimilarityTest, SelfDominanceAndBounds) {
  std::mt19937_64 rng(8);
  const AggregationParams k1{0.0, 0.0};
  for (int trial = 0; trial < 30; ++trial) {
    const PatchEmbeddings a = RandomPatches(rng, 3, 3, 4);
    const PatchEmbeddings b = RandomPatches(rng, 4, 3, 4);
    const double self = VideoSimilarity(a, a, k1, {});
    EXPECT_NEAR(self, 1.0, 1e-15);
    const double cross = VideoSimilarity(a, b, k1, {});
    EXPECT_GE(self + 1e-15, cross);
    EXPECT_LE(std::abs(cross), 1.0);
    EXPECT_LE(std::abs(VideoSimilarity(a, b, {0.7, 0.5}, {})), 1.0);
  }
}

TEST(VideoSimilarityTest, OrthogonalAndTwoFrameHand) {
  const PatchEmbeddings a(1, 1, 2, {1.0, 0.0});
  const PatchEmbeddings b(1, 1, 2, {0.0, 1.0});
  EXPECT_EQ(VideoSimilarity(a, b, {}, {}), 0.0);
  // Two frames, one patch each. Frame cosines: [[1, 0.6], [0, 0.8]].
  const PatchEmbeddings q(2, 1, 2, {1.0, 0.0, 0.0, 1.0});
  const PatchEmbeddings c(2, 1, 2, {1.0, 0.0, 0.6, 0.8});
  EXPECT_NEAR(VideoSimilarity(q, c, {0.0, 0.0}, {}), (1.0 + 0.8) / 2.0, 1e-15);
  EXPECT_NEAR(VideoSimilarity(q, c, {0.0, 1.0}, {}), (1.0 + 0.6 + 0.0 + 0.8) / 4.0, 1e-15);
}

TEST(BatchSimilarityMatrixTest, Shapes) {
  std::mt19937_64 rng(9);
  const PatchEmbeddings a = RandomPatches(rng, 3, 2, 4);
  const std::vector<PatchEmbeddings> one{a};
  const Matrix m1 = BatchSimilarityMatrix(one, {}, {});
  ASSERT_EQ(m1.rows(), 1u);
  EXPECT_EQ(m1(0, 0), VideoSimilarity(a, a, {}, {}));
  const std::vector<PatchEmbeddings> two{a, a};
  const Matrix m2 = BatchSimilarityMatrix(two, {}, {});
  for (const double v : m2.data()) EXPECT_EQ(v, m2(0, 0));
}

TEST(BatchSimilarityMatrixTest, EntriesMatchPairCallsForAnyThreadCount) {
  std::mt19937_64 rng(10);
  std::vector<PatchEmbeddings> batch;
  for (int k = 0; k < 5; ++k) batch.push_back(RandomPatches(rng, 3, 3, 4));
  const AggregationParams p{0.67, 0.67};
  const Matrix serial = BatchSimilarityMatrix(batch, p, {}, 1);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      ASSERT_EQ(serial(i, j), VideoSimilarity(batch[i], batch[j], p, {}));
    }
  }
  EXPECT_EQ(BatchSimilarityMatrix(batch, p, {}, 3), serial);
  EXPECT_EQ(BatchSimilarityMatrix(batch, p, {}, 8), serial);
}

TEST(AggregationParamsTest, Validate) {
  EXPECT_THROW((AggregationParams{-0.1, 0.1}.Validate()), ParameterError);
  EXPECT_THROW((AggregationParams{0.1, 1.5}.Validate()), ParameterError);
  EXPECT_NO_THROW((AggregationParams{0.0, 1.0}.Validate()));
}

}  // namespace
}  // namespace aprank
