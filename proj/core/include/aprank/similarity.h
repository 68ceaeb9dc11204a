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

// Video-level similarity from patch embeddings: cosine patch similarity,
// spatial TopK-Chamfer into a frame similarity matrix, an optional refiner and
// temporal TopK-Chamfer into one score.

#ifndef APRANK_SIMILARITY_H_
#define APRANK_SIMILARITY_H_

#include <cstddef>
#include <span>
#include <vector>

#include "aprank/matrix.h"

namespace aprank {

// Per-clip T x R x D patch features, row-major.
class PatchEmbeddings {
 public:
  PatchEmbeddings() = default;
  PatchEmbeddings(std::size_t frames, std::size_t patches, std::size_t dim);
  PatchEmbeddings(std::size_t frames, std::size_t patches, std::size_t dim,
                  std::vector<double> data);

  std::size_t frames() const { return frames_; }
  std::size_t patches() const { return patches_; }
  std::size_t dim() const { return dim_; }

  std::span<double> patch(std::size_t t, std::size_t r) {
    return {data_.data() + (t * patches_ + r) * dim_, dim_};
  }
  std::span<const double> patch(std::size_t t, std::size_t r) const {
    return {data_.data() + (t * patches_ + r) * dim_, dim_};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const PatchEmbeddings&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t patches_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Cosine similarities of every patch pair of two clips, indexed
// (query frame x, query patch i, candidate patch j, candidate frame y).
class SimilarityTensor {
 public:
  SimilarityTensor(std::size_t frames, std::size_t patches,
                   std::size_t candidate_patches, std::size_t candidate_frames);

  std::size_t frames() const { return frames_; }
  std::size_t patches() const { return patches_; }
  std::size_t candidate_patches() const { return candidate_patches_; }
  std::size_t candidate_frames() const { return candidate_frames_; }

  double& at(std::size_t x, std::size_t i, std::size_t j, std::size_t y) {
    return data_[Offset(x, i, j, y)];
  }
  double at(std::size_t x, std::size_t i, std::size_t j, std::size_t y) const {
    return data_[Offset(x, i, j, y)];
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t Offset(std::size_t x, std::size_t i, std::size_t j,
                     std::size_t y) const {
    return ((x * patches_ + i) * candidate_patches_ + j) * candidate_frames_ + y;
  }

  std::size_t frames_;
  std::size_t patches_;
  std::size_t candidate_patches_;
  std::size_t candidate_frames_;
  std::vector<double> data_;
};

// Top-k rates. A rate of 0 selects a single element (plain Chamfer).
struct AggregationParams {
  double k_s = 0.10;
  double k_t = 0.03;

  void Validate() const;
};

enum class RefinerKind { kIdentity, kAffine, kConv };

// Learnable map applied to the frame similarity matrix before temporal
// aggregation.
//   identity: m
//   affine:   clamp(scale * m + bias, -1, 1), then stride-`downsample` averaging
//   conv:     tanh(conv(m, conv_weights) + bias), then stride averaging
// conv_weights is a conv_size x conv_size kernel, zero padded ("same").
struct RefinerParams {
  RefinerKind kind = RefinerKind::kIdentity;
  double scale = 1.0;
  double bias = 0.0;
  std::size_t downsample = 1;
  std::size_t conv_size = 3;
  std::vector<double> conv_weights;

  void Validate() const;
  // Centre tap 1, all others 0.
  static RefinerParams DeltaConv(std::size_t size = 3);

  bool operator==(const RefinerParams&) const = default;
};

// Cosine of two equal-length vectors. Throws DegenerateInputError when either
// has zero norm.
double Cosine(std::span<const double> a, std::span<const double> b);

SimilarityTensor PatchSimilarity(const PatchEmbeddings& a,
                                 const PatchEmbeddings& b);

// K = max(1, round(rate * extent)), capped at extent.
std::size_t TopKCount(double rate, std::size_t extent);

// Indices of the k largest values ordered by (value desc, index asc).
std::vector<std::size_t> TopKIndices(std::span<const double> values,
                                     std::size_t k);

// Sum of the k largest values, accumulated in ascending index order so that
// k == size reproduces a plain left-to-right sum exactly.
double TopKSum(std::span<const double> values, std::size_t k);

// m[x, y] = (1/R) sum_i max_j S[x, i, j, y].
Matrix ChamferSimilarity(const SimilarityTensor& s);

// m[x, y] = (1/(R K)) sum_i sum_{j <= K} S[x, i, [j], y], K = TopKCount(k_s, R').
Matrix SpatialTopKChamfer(const SimilarityTensor& s, double k_s);

Matrix Refine(const Matrix& m, const RefinerParams& r);

// f = (1/(T K)) sum_x sum_{j <= K} m[x, [j]], K = TopKCount(k_t, T').
double TemporalTopKChamfer(const Matrix& m, double k_t);

// Mean over rows of the row maximum.
double TemporalChamfer(const Matrix& m);

// Row sums accumulated then divided by the entry count.
double MeanPooling(const Matrix& m);

double VideoSimilarity(const PatchEmbeddings& a, const PatchEmbeddings& b,
                       const AggregationParams& p, const RefinerParams& r);

// Entry (i, j) is VideoSimilarity(batch[i], batch[j]); not symmetric in
// general. Pairs are spread over `num_threads` workers; each entry is written
// by exactly one worker so the result does not depend on the thread count.
Matrix BatchSimilarityMatrix(std::span<const PatchEmbeddings> batch,
                             const AggregationParams& p,
                             const RefinerParams& r,
                             std::size_t num_threads = 1);

}  // namespace aprank

#endif  // APRANK_SIMILARITY_H_
