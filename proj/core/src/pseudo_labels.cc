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

#include "aprank/pseudo_labels.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aprank/errors.h"
#include "aprank/similarity.h"

namespace aprank {
namespace {

// Absorbs representation error in rate * cols, e.g. 0.3 * 10.
constexpr double kCountSlack = 1e-9;

}  // namespace

FrameEmbeddings::FrameEmbeddings(std::size_t frames, std::size_t dim,
                                 std::vector<double> data)
    : frames_(frames), dim_(dim), data_(std::move(data)) {
  if (frames_ == 0 || dim_ == 0) {
    throw StructuralError("FrameEmbeddings: T and D' must be >= 1");
  }
  if (data_.size() != frames_ * dim_) {
    throw StructuralError("FrameEmbeddings: payload has " +
                          std::to_string(data_.size()) + " values, expected " +
                          std::to_string(frames_ * dim_));
  }
  for (const double v : data_) {
    if (!std::isfinite(v)) throw StructuralError("FrameEmbeddings: non-finite value");
  }
}

void LabelRates::Validate() const {
  if (!(top > 0.0 && top < 1.0)) {
    throw ParameterError("top frame rate must lie in (0, 1), got " +
                         std::to_string(top));
  }
  if (!(bottom > 0.0 && bottom < 1.0)) {
    throw ParameterError("bottom frame rate must lie in (0, 1), got " +
                         std::to_string(bottom));
  }
}

std::size_t LabelRates::PositiveCount(std::size_t cols) const {
  Validate();
  const auto n = static_cast<std::size_t>(
      std::ceil(top * static_cast<double>(cols) - kCountSlack));
  return std::max<std::size_t>(1, n);
}

std::size_t LabelRates::NegativeCount(std::size_t cols) const {
  Validate();
  const auto n = static_cast<std::size_t>(
      std::floor(bottom * static_cast<double>(cols) + kCountSlack));
  if (PositiveCount(cols) + n > cols) {
    throw ParameterError("frame rates overlap: " +
                         std::to_string(PositiveCount(cols)) + " positives + " +
                         std::to_string(n) + " negatives > " +
                         std::to_string(cols) + " columns");
  }
  return n;
}

std::size_t PseudoLabelMatrix::CountInRow(std::size_t r, FrameLabel label) const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < cols_; ++c) n += at(r, c) == label ? 1 : 0;
  return n;
}

Matrix TeacherFrameSimilarity(const FrameEmbeddings& a,
                              const FrameEmbeddings& b) {
  if (a.dim() != b.dim()) {
    throw StructuralError("TeacherFrameSimilarity: dims differ (" +
                          std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
  Matrix s(a.frames(), b.frames());
  for (std::size_t x = 0; x < a.frames(); ++x) {
    for (std::size_t y = 0; y < b.frames(); ++y) {
      s(x, y) = Cosine(a.frame(x), b.frame(y));
    }
  }
  return s;
}

PseudoLabelMatrix GeneratePseudoLabels(const Matrix& teacher_sim,
                                       const LabelRates& rates) {
  const std::size_t cols = teacher_sim.cols();
  const std::size_t num_pos = rates.PositiveCount(cols);
  const std::size_t num_neg = rates.NegativeCount(cols);
  PseudoLabelMatrix labels(teacher_sim.rows(), cols);
  std::vector<std::size_t> order(cols);
  for (std::size_t x = 0; x < teacher_sim.rows(); ++x) {
    const auto row = teacher_sim.row(x);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      if (row[l] != row[r]) return row[l] > row[r];
      return l < r;
    });
    for (std::size_t k = 0; k < num_pos; ++k) {
      labels.at(x, order[k]) = FrameLabel::kPositive;
    }
    for (std::size_t k = cols - num_neg; k < cols; ++k) {
      labels.at(x, order[k]) = FrameLabel::kNegative;
    }
  }
  return labels;
}

std::vector<QueryContext> FrameQueryContexts(const Matrix& student_sim,
                                             const PseudoLabelMatrix& labels) {
  if (student_sim.rows() != labels.rows() || student_sim.cols() != labels.cols()) {
    throw StructuralError(
        "FrameQueryContexts: similarity is " +
        std::to_string(student_sim.rows()) + "x" +
        std::to_string(student_sim.cols()) + " but labels are " +
        std::to_string(labels.rows()) + "x" + std::to_string(labels.cols()));
  }
  std::vector<QueryContext> contexts(student_sim.rows());
  for (std::size_t x = 0; x < student_sim.rows(); ++x) {
    for (std::size_t y = 0; y < student_sim.cols(); ++y) {
      switch (labels.at(x, y)) {
        case FrameLabel::kPositive:
          contexts[x].positives.push_back(student_sim(x, y));
          break;
        case FrameLabel::kNegative:
          contexts[x].negatives.push_back(student_sim(x, y));
          break;
        case FrameLabel::kIgnore:
          break;
      }
    }
  }
  return contexts;
}

}  // namespace aprank
