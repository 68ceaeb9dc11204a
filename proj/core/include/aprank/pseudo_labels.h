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

#ifndef APRANK_PSEUDO_LABELS_H_
#define APRANK_PSEUDO_LABELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aprank/matrix.h"
#include "aprank/ranking_core.h"

namespace aprank {

// T x D' per-frame embeddings from the frozen teacher.
class FrameEmbeddings {
 public:
  FrameEmbeddings() = default;
  FrameEmbeddings(std::size_t frames, std::size_t dim,
                  std::vector<double> data);

  std::size_t frames() const { return frames_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> frame(std::size_t t) const {
    return {data_.data() + t * dim_, dim_};
  }
  std::span<double> frame(std::size_t t) {
    return {data_.data() + t * dim_, dim_};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const FrameEmbeddings&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// Fractions of each row labeled positive (top) and negative (bottom).
struct LabelRates {
  double top = 0.35;
  double bottom = 0.35;

  void Validate() const;
  // ceil(top * cols) and floor(bottom * cols); throws ParameterError when
  // they overlap.
  std::size_t PositiveCount(std::size_t cols) const;
  std::size_t NegativeCount(std::size_t cols) const;
};

enum class FrameLabel : std::uint8_t { kIgnore = 0, kPositive = 1, kNegative = 2 };

class PseudoLabelMatrix {
 public:
  PseudoLabelMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), labels_(rows * cols, FrameLabel::kIgnore) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  FrameLabel at(std::size_t r, std::size_t c) const {
    return labels_[r * cols_ + c];
  }
  FrameLabel& at(std::size_t r, std::size_t c) { return labels_[r * cols_ + c]; }
  std::size_t CountInRow(std::size_t r, FrameLabel label) const;

  bool operator==(const PseudoLabelMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<FrameLabel> labels_;
};

// S'[x, y] = cosine(a[x], b[y]).
Matrix TeacherFrameSimilarity(const FrameEmbeddings& a,
                              const FrameEmbeddings& b);

// Per row, the PositiveCount columns ranked highest are positive and the
// NegativeCount ranked lowest are negative. Ranking is by value with ties
// broken towards the lower column index, so a constant row labels its first
// columns positive and its last columns negative.
PseudoLabelMatrix GeneratePseudoLabels(const Matrix& teacher_sim,
                                       const LabelRates& rates);

// One QueryContext per row of the student frame similarity matrix; ignored
// columns are dropped.
std::vector<QueryContext> FrameQueryContexts(const Matrix& student_sim,
                                             const PseudoLabelMatrix& labels);

}  // namespace aprank

#endif  // APRANK_PSEUDO_LABELS_H_
