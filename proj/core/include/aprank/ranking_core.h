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

#ifndef APRANK_RANKING_CORE_H_
#define APRANK_RANKING_CORE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aprank {

// Binary n x n video-level relevance. Y(i, j) == 1 marks i and j as relevant.
// The diagonal is stored but never enters a positive or negative set.
class RelevanceMatrix {
 public:
  RelevanceMatrix() = default;
  // Entries must be exactly 0 or 1, row-major.
  RelevanceMatrix(std::size_t n, std::vector<std::uint8_t> entries);

  // Y(i, j) = 1 iff group_ids[i] == group_ids[j]; the diagonal is set to 1.
  static RelevanceMatrix FromGroups(std::span<const int> group_ids);

  std::size_t size() const { return n_; }
  bool relevant(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j] != 0;
  }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {entries_.data() + i * n_, n_};
  }
  bool symmetric() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> entries_;
};

// One query's similarity scores split by relevance. Only differences between
// scores matter to the losses built on top of it.
struct QueryContext {
  std::vector<double> positives;
  std::vector<double> negatives;

  bool skipped() const { return positives.empty(); }
};

// Parallel score / label lists for one query, consumed by the metrics.
struct ScoredList {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;

  // Throws StructuralError on length mismatch, non-binary labels or
  // non-finite scores.
  void Validate() const;
  std::size_t num_positives() const;
};

// H(x) = 1 if x > 0, else 0. H(0) == 0.
inline double Heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

// 1 + #{s' in pool : s' > s}. Ties do not worsen the rank.
std::size_t DescendingRank(double s, std::span<const double> pool);

// Index form of PartitionQuery: which columns of a row are positives and
// which are negatives.
struct QueryIndices {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};
QueryIndices PartitionQueryIndices(std::span<const std::uint8_t> relevance_row,
                                   std::size_t self_index);

// Splits one similarity row into positives (Y == 1) and negatives (Y == 0).
// self_index is dropped from both sets.
QueryContext PartitionQuery(std::span<const double> row,
                            std::span<const std::uint8_t> relevance_row,
                            std::size_t self_index);

}  // namespace aprank

#endif  // APRANK_RANKING_CORE_H_
