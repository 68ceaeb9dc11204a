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
#include <numeric>
#include <string>
#include <exception>
#include <mutex>
#include <thread>

#include "aprank/errors.h"

namespace aprank {
namespace {

void CheckRate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ParameterError(std::string(name) + " must lie in [0, 1], got " +
                         std::to_string(rate));
  }
}

double Norm(std::span<const double> v) {
  double sq = 0.0;
  for (const double x : v) sq += x * x;
  return std::sqrt(sq);
}

// Mean over each s x s block; edge blocks average the entries they cover.
Matrix BlockAverage(const Matrix& m, std::size_t s) {
  if (s == 1) return m;
  const std::size_t rows = (m.rows() + s - 1) / s;
  const std::size_t cols = (m.cols() + s - 1) / s;
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t x = r * s; x < std::min(m.rows(), (r + 1) * s); ++x) {
        for (std::size_t y = c * s; y < std::min(m.cols(), (c + 1) * s); ++y) {
          sum += m(x, y);
          ++count;
        }
      }
      out(r, c) = sum / static_cast<double>(count);
    }
  }
  return out;
}

}  // namespace

PatchEmbeddings::PatchEmbeddings(std::size_t frames, std::size_t patches,
                                 std::size_t dim)
    : PatchEmbeddings(frames, patches, dim,
                      std::vector<double>(frames * patches * dim, 0.0)) {}

PatchEmbeddings::PatchEmbeddings(std::size_t frames, std::size_t patches,
                                 std::size_t dim, std::vector<double> data)
    : frames_(frames), patches_(patches), dim_(dim), data_(std::move(data)) {
  if (frames_ == 0 || patches_ == 0 || dim_ == 0) {
    throw StructuralError("PatchEmbeddings: T, R and D must all be >= 1");
  }
  if (data_.size() != frames_ * patches_ * dim_) {
    throw StructuralError("PatchEmbeddings: payload has " +
                          std::to_string(data_.size()) + " values, expected " +
                          std::to_string(frames_ * patches_ * dim_));
  }
  for (const double v : data_) {
    if (std::isnan(v)) throw StructuralError("PatchEmbeddings: NaN value");
  }
}

SimilarityTensor::SimilarityTensor(std::size_t frames, std::size_t patches,
                                   std::size_t candidate_patches,
                                   std::size_t candidate_frames)
    : frames_(frames),
      patches_(patches),
      candidate_patches_(candidate_patches),
      candidate_frames_(candidate_frames),
      data_(frames * patches * candidate_patches * candidate_frames, 0.0) {}

void AggregationParams::Validate() const {
  CheckRate(k_s, "k_s");
  CheckRate(k_t, "k_t");
}

void RefinerParams::Validate() const {
  if (downsample < 1) throw ParameterError("refiner downsample must be >= 1");
  switch (kind) {
    case RefinerKind::kIdentity:
      if (scale != 1.0 || bias != 0.0 || downsample != 1) {
        throw ParameterError(
            "identity refiner requires scale 1, bias 0 and downsample 1");
      }
      break;
    case RefinerKind::kAffine:
      if (!std::isfinite(scale) || !std::isfinite(bias)) {
        throw ParameterError("affine refiner parameters must be finite");
      }
      break;
    case RefinerKind::kConv:
      // scale has no role in the conv map; pinning it keeps checkpoints exact.
      if (scale != 1.0) throw ParameterError("conv refiner requires scale 1");
      if (!std::isfinite(bias)) throw ParameterError("conv refiner bias must be finite");
      if (conv_size % 2 == 0) {
        throw ParameterError("conv refiner kernel size must be odd");
      }
      if (conv_weights.size() != conv_size * conv_size) {
        throw ParameterError("conv refiner needs " +
                             std::to_string(conv_size * conv_size) +
                             " weights, got " +
                             std::to_string(conv_weights.size()));
      }
      break;
  }
}

RefinerParams RefinerParams::DeltaConv(std::size_t size) {
  RefinerParams r;
  r.kind = RefinerKind::kConv;
  r.conv_size = size;
  r.conv_weights.assign(size * size, 0.0);
  r.conv_weights[(size / 2) * size + size / 2] = 1.0;
  return r;
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw StructuralError("Cosine: dimension mismatch " +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  const double na = Norm(a);
  const double nb = Norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("Cosine: zero-norm vector");
  }
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

SimilarityTensor PatchSimilarity(const PatchEmbeddings& a,
                                 const PatchEmbeddings& b) {
  if (a.dim() != b.dim()) {
    throw StructuralError("PatchSimilarity: embedding dims differ (" +
                          std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
  SimilarityTensor s(a.frames(), a.patches(), b.patches(), b.frames());
  for (std::size_t x = 0; x < a.frames(); ++x) {
    for (std::size_t i = 0; i < a.patches(); ++i) {
      for (std::size_t j = 0; j < b.patches(); ++j) {
        for (std::size_t y = 0; y < b.frames(); ++y) {
          s.at(x, i, j, y) = Cosine(a.patch(x, i), b.patch(y, j));
        }
      }
    }
  }
  return s;
}

std::size_t TopKCount(double rate, std::size_t extent) {
  CheckRate(rate, "top-k rate");
  if (extent == 0) throw StructuralError("TopKCount: empty extent");
  const auto k = static_cast<std::size_t>(
      std::llround(rate * static_cast<double>(extent)));
  return std::clamp<std::size_t>(k, 1, extent);
}

std::vector<std::size_t> TopKIndices(std::span<const double> values,
                                     std::size_t k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, values.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(), [&](std::size_t l, std::size_t r) {
                      if (values[l] != values[r]) return values[l] > values[r];
                      return l < r;
                    });
  order.resize(k);
  return order;
}

double TopKSum(std::span<const double> values, std::size_t k) {
  if (k >= values.size()) {
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum;
  }
  std::vector<std::size_t> idx = TopKIndices(values, k);
  std::sort(idx.begin(), idx.end());
  double sum = 0.0;
  for (const std::size_t j : idx) sum += values[j];
  return sum;
}

Matrix ChamferSimilarity(const SimilarityTensor& s) {
  const std::size_t rp = s.patches();
  Matrix m(s.frames(), s.candidate_frames());
  for (std::size_t x = 0; x < s.frames(); ++x) {
    for (std::size_t y = 0; y < s.candidate_frames(); ++y) {
      double total = 0.0;
      for (std::size_t i = 0; i < rp; ++i) {
        double best = s.at(x, i, 0, y);
        for (std::size_t j = 1; j < s.candidate_patches(); ++j) {
          best = std::max(best, s.at(x, i, j, y));
        }
        total += best;
      }
      m(x, y) = total / static_cast<double>(rp);
    }
  }
  return m;
}

Matrix SpatialTopKChamfer(const SimilarityTensor& s, double k_s) {
  const std::size_t k = TopKCount(k_s, s.candidate_patches());
  const double denom = static_cast<double>(s.patches() * k);
  Matrix m(s.frames(), s.candidate_frames());
  std::vector<double> scores(s.candidate_patches());
  for (std::size_t x = 0; x < s.frames(); ++x) {
    for (std::size_t y = 0; y < s.candidate_frames(); ++y) {
      double total = 0.0;
      for (std::size_t i = 0; i < s.patches(); ++i) {
        for (std::size_t j = 0; j < s.candidate_patches(); ++j) {
          scores[j] = s.at(x, i, j, y);
        }
        total += TopKSum(scores, k);
      }
      m(x, y) = total / denom;
    }
  }
  return m;
}

Matrix Refine(const Matrix& m, const RefinerParams& r) {
  r.Validate();
  switch (r.kind) {
    case RefinerKind::kIdentity:
      return m;
    case RefinerKind::kAffine: {
      Matrix out(m.rows(), m.cols());
      for (std::size_t k = 0; k < m.size(); ++k) {
        out.data()[k] = std::clamp(r.scale * m.data()[k] + r.bias, -1.0, 1.0);
      }
      return BlockAverage(out, r.downsample);
    }
    case RefinerKind::kConv: {
      const auto half = static_cast<long>(r.conv_size / 2);
      const auto rows = static_cast<long>(m.rows());
      const auto cols = static_cast<long>(m.cols());
      Matrix out(m.rows(), m.cols());
      for (long x = 0; x < rows; ++x) {
        for (long y = 0; y < cols; ++y) {
          double acc = r.bias;
          for (long u = -half; u <= half; ++u) {
            for (long v = -half; v <= half; ++v) {
              const long sx = x + u;
              const long sy = y + v;
              if (sx < 0 || sy < 0 || sx >= rows || sy >= cols) continue;
              acc += r.conv_weights[static_cast<std::size_t>(
                         (u + half) * static_cast<long>(r.conv_size) +
                         (v + half))] *
                     m(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
            }
          }
          out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
              std::tanh(acc);
        }
      }
      return BlockAverage(out, r.downsample);
    }
  }
  return m;
}

double TemporalTopKChamfer(const Matrix& m, double k_t) {
  if (m.empty()) throw StructuralError("TemporalTopKChamfer: empty matrix");
  const std::size_t k = TopKCount(k_t, m.cols());
  double total = 0.0;
  for (std::size_t x = 0; x < m.rows(); ++x) total += TopKSum(m.row(x), k);
  return total / static_cast<double>(m.rows() * k);
}

double TemporalChamfer(const Matrix& m) {
  if (m.empty()) throw StructuralError("TemporalChamfer: empty matrix");
  double total = 0.0;
  for (std::size_t x = 0; x < m.rows(); ++x) {
    const auto row = m.row(x);
    total += *std::max_element(row.begin(), row.end());
  }
  return total / static_cast<double>(m.rows());
}

double MeanPooling(const Matrix& m) {
  if (m.empty()) throw StructuralError("MeanPooling: empty matrix");
  double total = 0.0;
  for (std::size_t x = 0; x < m.rows(); ++x) {
    double row_sum = 0.0;
    for (const double v : m.row(x)) row_sum += v;
    total += row_sum;
  }
  return total / static_cast<double>(m.rows() * m.cols());
}

double VideoSimilarity(const PatchEmbeddings& a, const PatchEmbeddings& b,
                       const AggregationParams& p, const RefinerParams& r) {
  p.Validate();
  const Matrix frame_sim = SpatialTopKChamfer(PatchSimilarity(a, b), p.k_s);
  return TemporalTopKChamfer(Refine(frame_sim, r), p.k_t);
}

Matrix BatchSimilarityMatrix(std::span<const PatchEmbeddings> batch,
                             const AggregationParams& p,
                             const RefinerParams& r, std::size_t num_threads) {
  if (batch.empty()) throw StructuralError("BatchSimilarityMatrix: empty batch");
  const std::size_t n = batch.size();
  Matrix sim(n, n);
  auto work = [&](std::size_t worker, std::size_t workers) {
    for (std::size_t cell = worker; cell < n * n; cell += workers) {
      sim.data()[cell] = VideoSimilarity(batch[cell / n], batch[cell % n], p, r);
    }
  };
  num_threads = std::max<std::size_t>(1, std::min(num_threads, n * n));
  if (num_threads == 1) {
    work(0, 1);
    return sim;
  }
  std::vector<std::thread> pool;
  pool.reserve(num_threads);
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (std::size_t w = 0; w < num_threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w, num_threads);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return sim;
}

}  // namespace aprank
