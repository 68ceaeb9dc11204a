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
#include <cmath>
#include <string>

#include "aprank/errors.h"

namespace aprank {

RelevanceMatrix::RelevanceMatrix(std::size_t n,
                                 std::vector<std::uint8_t> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_) {
    throw StructuralError("RelevanceMatrix: expected " +
                          std::to_string(n_ * n_) + " entries, got " +
                          std::to_string(entries_.size()));
  }
  for (const std::uint8_t e : entries_) {
    if (e > 1) throw StructuralError("RelevanceMatrix: entries must be 0 or 1");
  }
}

RelevanceMatrix RelevanceMatrix::FromGroups(std::span<const int> group_ids) {
  const std::size_t n = group_ids.size();
  std::vector<std::uint8_t> entries(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      entries[i * n + j] = group_ids[i] == group_ids[j] ? 1 : 0;
    }
  }
  return RelevanceMatrix(n, std::move(entries));
}

bool RelevanceMatrix::symmetric() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (relevant(i, j) != relevant(j, i)) return false;
    }
  }
  return true;
}

void ScoredList::Validate() const {
  if (scores.size() != labels.size()) {
    throw StructuralError("ScoredList: " + std::to_string(scores.size()) +
                          " scores vs " + std::to_string(labels.size()) +
                          " labels");
  }
  for (const double s : scores) {
    if (!std::isfinite(s)) throw StructuralError("ScoredList: non-finite score");
  }
  for (const std::uint8_t l : labels) {
    if (l > 1) throw StructuralError("ScoredList: labels must be 0 or 1");
  }
}

std::size_t ScoredList::num_positives() const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

std::size_t DescendingRank(double s, std::span<const double> pool) {
  std::size_t rank = 1;
  for (const double other : pool) {
    if (other - s > 0.0) ++rank;
  }
  return rank;
}

QueryIndices PartitionQueryIndices(std::span<const std::uint8_t> relevance_row,
                                   std::size_t self_index) {
  if (self_index >= relevance_row.size()) {
    throw StructuralError("PartitionQueryIndices: self index out of range");
  }
  QueryIndices idx;
  for (std::size_t j = 0; j < relevance_row.size(); ++j) {
    if (j == self_index) continue;
    (relevance_row[j] != 0 ? idx.positives : idx.negatives).push_back(j);
  }
  return idx;
}

QueryContext PartitionQuery(std::span<const double> row,
                            std::span<const std::uint8_t> relevance_row,
                            std::size_t self_index) {
  if (row.size() != relevance_row.size()) {
    throw StructuralError("PartitionQuery: row has " +
                          std::to_string(row.size()) + " scores but " +
                          std::to_string(relevance_row.size()) + " labels");
  }
  if (self_index >= row.size()) {
    throw StructuralError("PartitionQuery: self index out of range");
  }
  QueryContext q;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j == self_index) continue;
    if (relevance_row[j] != 0) {
      q.positives.push_back(row[j]);
    } else {
      q.negatives.push_back(row[j]);
    }
  }
  return q;
}

}  // namespace aprank
