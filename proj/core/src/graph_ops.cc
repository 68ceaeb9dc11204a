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

#include "aprank/graph_ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "aprank/base_losses.h"
#include "aprank/errors.h"
#include "aprank/similarity.h"

namespace aprank::autodiff {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapConst = Eigen::Map<const RowMatrix>;
using MapMut = Eigen::Map<RowMatrix>;

MapConst View(const Matrix& m) {
  return MapConst(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}
MapMut View(Matrix& m) {
  return MapMut(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

void CheckScalar(const Graph& g, Var v, const char* what) {
  const Matrix& m = g.Value(v);
  if (m.rows() != 1 || m.cols() != 1) {
    throw StructuralError(std::string(what) + ": expected a 1x1 input, got " +
                          std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

// Index of the largest value, lowest index on ties.
std::size_t ArgMax(const double* v, std::size_t n, std::size_t stride) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (v[j * stride] > v[best * stride]) best = j;
  }
  return best;
}

// Number of kinks at or below d: identifies the smooth piece d lies on.
std::uint64_t Piece(double d, std::span<const double> kinks) {
  std::uint64_t p = 0;
  for (const double k : kinks) p += d >= k ? 1 : 0;
  return p;
}

std::uint64_t RowPieces(std::span<const double> row,
                        std::span<const std::size_t> anchors,
                        std::span<const std::size_t> others,
                        std::span<const double> kinks, std::uint64_t h) {
  for (const std::size_t a : anchors) {
    for (const std::size_t b : others) {
      h = HashMix(h, Piece(row[b] - row[a], kinks));
    }
  }
  return h;
}

}  // namespace

Var MatMulBT(Graph& g, Var a, Var b) {
  const Matrix& av = g.Value(a);
  const Matrix& bv = g.Value(b);
  if (av.cols() != bv.cols()) {
    throw StructuralError("MatMulBT: inner dims " + std::to_string(av.cols()) +
                          " vs " + std::to_string(bv.cols()));
  }
  Matrix out(av.rows(), bv.rows());
  View(out).noalias() = View(av) * View(bv).transpose();
  return g.Record(OpKind::kMatMul, {a, b}, std::move(out),
                  [a, b](Graph& g, Var self) {
                    const auto dc = View(g.Grad(self));
                    if (g.RequiresGrad(a)) {
                      View(g.MutableGrad(a)).noalias() += dc * View(g.Value(b));
                    }
                    if (g.RequiresGrad(b)) {
                      View(g.MutableGrad(b)).noalias() +=
                          dc.transpose() * View(g.Value(a));
                    }
                  });
}

Var NormalizeRows(Graph& g, Var a) {
  const Matrix& av = g.Value(a);
  Matrix out(av.rows(), av.cols());
  auto norms = std::make_shared<std::vector<double>>(av.rows());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double sq = 0.0;
    for (const double v : av.row(r)) sq += v * v;
    const double n = std::sqrt(sq);
    if (n == 0.0) {
      throw DegenerateInputError("NormalizeRows: zero-norm row " +
                                 std::to_string(r));
    }
    (*norms)[r] = n;
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) = av(r, c) / n;
  }
  return g.Record(OpKind::kCosineNormalize, {a}, std::move(out),
                  [a, norms](Graph& g, Var self) {
                    if (!g.RequiresGrad(a)) return;
                    const Matrix& y = g.Value(self);
                    const Matrix& dy = g.Grad(self);
                    Matrix& dx = g.MutableGrad(a);
                    for (std::size_t r = 0; r < y.rows(); ++r) {
                      double dot = 0.0;
                      for (std::size_t c = 0; c < y.cols(); ++c) {
                        dot += y(r, c) * dy(r, c);
                      }
                      const double inv = 1.0 / (*norms)[r];
                      for (std::size_t c = 0; c < y.cols(); ++c) {
                        dx(r, c) += (dy(r, c) - y(r, c) * dot) * inv;
                      }
                    }
                  });
}

Var Mean(Graph& g, Var a) {
  const Matrix& av = g.Value(a);
  if (av.empty()) throw StructuralError("Mean: empty input");
  double sum = 0.0;
  for (const double v : av.data()) sum += v;
  const double inv = 1.0 / static_cast<double>(av.size());
  return g.Record(OpKind::kReduce, {a}, Matrix(1, 1, sum * inv),
                  [a, inv](Graph& g, Var self) {
                    if (!g.RequiresGrad(a)) return;
                    const double d = g.Grad(self)(0, 0) * inv;
                    for (double& x : g.MutableGrad(a).data()) x += d;
                  });
}

Var WeightedSum(Graph& g, std::span<const Var> terms,
                std::span<const double> weights) {
  if (terms.size() != weights.size()) {
    throw StructuralError("WeightedSum: " + std::to_string(terms.size()) +
                          " terms vs " + std::to_string(weights.size()) +
                          " weights");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    CheckScalar(g, terms[t], "WeightedSum");
    total += weights[t] * g.Value(terms[t])(0, 0);
  }
  std::vector<Var> inputs(terms.begin(), terms.end());
  std::vector<double> w(weights.begin(), weights.end());
  return g.Record(OpKind::kReduce, inputs, Matrix(1, 1, total),
                  [inputs, w](Graph& g, Var self) {
                    const double d = g.Grad(self)(0, 0);
                    for (std::size_t t = 0; t < inputs.size(); ++t) {
                      if (g.RequiresGrad(inputs[t])) {
                        g.MutableGrad(inputs[t])(0, 0) += w[t] * d;
                      }
                    }
                  });
}

Var SpatialTopKChamfer(Graph& g, Var patch_sim, std::size_t frames,
                       std::size_t patches, std::size_t candidate_frames,
                       std::size_t candidate_patches, std::size_t k) {
  const Matrix& s = g.Value(patch_sim);
  if (s.rows() != frames * patches || s.cols() != candidate_frames * candidate_patches) {
    throw StructuralError("SpatialTopKChamfer: patch similarity is " +
                          std::to_string(s.rows()) + "x" +
                          std::to_string(s.cols()) + ", expected " +
                          std::to_string(frames * patches) + "x" +
                          std::to_string(candidate_frames * candidate_patches));
  }
  if (k < 1 || k > candidate_patches) {
    throw ParameterError("SpatialTopKChamfer: K out of range");
  }
  const double scale = 1.0 / static_cast<double>(patches * k);
  // selected[((x * P + i) * T' + y) * K + r] is the r-th chosen candidate patch.
  auto selected = std::make_shared<std::vector<std::uint32_t>>(
      frames * patches * candidate_frames * k);
  Matrix out(frames, candidate_frames);
  std::vector<double> buf(candidate_patches);
  std::uint64_t h = kHashSeed;
  for (std::size_t x = 0; x < frames; ++x) {
    for (std::size_t i = 0; i < patches; ++i) {
      const double* row = s.data().data() + (x * patches + i) * s.cols();
      for (std::size_t y = 0; y < candidate_frames; ++y) {
        const double* seg = row + y * candidate_patches;
        std::uint32_t* sel =
            selected->data() + ((x * patches + i) * candidate_frames + y) * k;
        double sum = 0.0;
        if (k == 1) {
          const std::size_t j = ArgMax(seg, candidate_patches, 1);
          sel[0] = static_cast<std::uint32_t>(j);
          sum = seg[j];
        } else {
          buf.assign(seg, seg + candidate_patches);
          const std::vector<std::size_t> idx = TopKIndices(buf, k);
          for (std::size_t r = 0; r < k; ++r) {
            sel[r] = static_cast<std::uint32_t>(idx[r]);
            sum += seg[idx[r]];
          }
        }
        out(x, y) += sum * scale;
        if (g.log_decisions()) {
          for (std::size_t r = 0; r < k; ++r) h = HashMix(h, sel[r]);
        }
      }
    }
  }
  if (g.log_decisions()) g.LogDecision(h);
  return g.Record(
      OpKind::kTopKGather, {patch_sim}, std::move(out),
      [=](Graph& g, Var self) {
        if (!g.RequiresGrad(patch_sim)) return;
        const Matrix& dout = g.Grad(self);
        Matrix& din = g.MutableGrad(patch_sim);
        for (std::size_t x = 0; x < frames; ++x) {
          for (std::size_t i = 0; i < patches; ++i) {
            double* row = din.data().data() + (x * patches + i) * din.cols();
            for (std::size_t y = 0; y < candidate_frames; ++y) {
              const double d = dout(x, y) * scale;
              const std::uint32_t* sel =
                  selected->data() + ((x * patches + i) * candidate_frames + y) * k;
              for (std::size_t r = 0; r < k; ++r) {
                row[y * candidate_patches + sel[r]] += d;
              }
            }
          }
        }
      });
}

Var TemporalTopKChamfer(Graph& g, Var frame_sim, std::size_t k) {
  const Matrix& m = g.Value(frame_sim);
  if (m.empty()) throw StructuralError("TemporalTopKChamfer: empty matrix");
  if (k < 1 || k > m.cols()) {
    throw ParameterError("TemporalTopKChamfer: K out of range");
  }
  const double scale = 1.0 / static_cast<double>(m.rows() * k);
  auto selected = std::make_shared<std::vector<std::size_t>>();
  selected->reserve(m.rows() * k);
  double total = 0.0;
  std::uint64_t h = kHashSeed;
  for (std::size_t x = 0; x < m.rows(); ++x) {
    const std::vector<std::size_t> idx = TopKIndices(m.row(x), k);
    for (const std::size_t j : idx) {
      total += m(x, j);
      selected->push_back(j);
      if (g.log_decisions()) h = HashMix(h, j);
    }
  }
  if (g.log_decisions()) g.LogDecision(h);
  return g.Record(OpKind::kTopKGather, {frame_sim}, Matrix(1, 1, total * scale),
                  [=](Graph& g, Var self) {
                    if (!g.RequiresGrad(frame_sim)) return;
                    const double d = g.Grad(self)(0, 0) * scale;
                    Matrix& din = g.MutableGrad(frame_sim);
                    for (std::size_t x = 0; x < din.rows(); ++x) {
                      for (std::size_t r = 0; r < k; ++r) {
                        din(x, (*selected)[x * k + r]) += d;
                      }
                    }
                  });
}

Var AffineClamp(Graph& g, Var m, Var scale, Var bias) {
  CheckScalar(g, scale, "AffineClamp scale");
  CheckScalar(g, bias, "AffineClamp bias");
  const Matrix& mv = g.Value(m);
  const double a = g.Value(scale)(0, 0);
  const double b = g.Value(bias)(0, 0);
  Matrix out(mv.rows(), mv.cols());
  auto active = std::make_shared<std::vector<std::uint8_t>>(mv.size());
  std::uint64_t h = kHashSeed;
  for (std::size_t k = 0; k < mv.size(); ++k) {
    const double z = a * mv.data()[k] + b;
    (*active)[k] = (z >= -1.0 && z <= 1.0) ? 1 : 0;
    out.data()[k] = std::clamp(z, -1.0, 1.0);
    if (g.log_decisions()) h = HashMix(h, (*active)[k]);
  }
  if (g.log_decisions()) g.LogDecision(h);
  return g.Record(OpKind::kClamp, {m, scale, bias}, std::move(out),
                  [m, scale, bias, active](Graph& g, Var self) {
                    const Matrix& dout = g.Grad(self);
                    const Matrix& mv = g.Value(m);
                    const double a = g.Value(scale)(0, 0);
                    double da = 0.0;
                    double db = 0.0;
                    const bool need_m = g.RequiresGrad(m);
                    for (std::size_t k = 0; k < mv.size(); ++k) {
                      if (!(*active)[k]) continue;
                      const double d = dout.data()[k];
                      da += d * mv.data()[k];
                      db += d;
                      if (need_m) g.MutableGrad(m).data()[k] += d * a;
                    }
                    if (g.RequiresGrad(scale)) g.MutableGrad(scale)(0, 0) += da;
                    if (g.RequiresGrad(bias)) g.MutableGrad(bias)(0, 0) += db;
                  });
}

Var BlockAverage(Graph& g, Var m, std::size_t s) {
  if (s < 1) throw ParameterError("BlockAverage: stride must be >= 1");
  const Matrix& mv = g.Value(m);
  const std::size_t rows = (mv.rows() + s - 1) / s;
  const std::size_t cols = (mv.cols() + s - 1) / s;
  Matrix out(rows, cols);
  auto count = [&mv, s](std::size_t r, std::size_t c) {
    const std::size_t h = std::min(mv.rows(), (r + 1) * s) - r * s;
    const std::size_t w = std::min(mv.cols(), (c + 1) * s) - c * s;
    return static_cast<double>(h * w);
  };
  for (std::size_t x = 0; x < mv.rows(); ++x) {
    for (std::size_t y = 0; y < mv.cols(); ++y) out(x / s, y / s) += mv(x, y);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) /= count(r, c);
  }
  const std::size_t in_rows = mv.rows();
  const std::size_t in_cols = mv.cols();
  return g.Record(OpKind::kReduce, {m}, std::move(out),
                  [m, s, in_rows, in_cols](Graph& g, Var self) {
                    if (!g.RequiresGrad(m)) return;
                    const Matrix& dout = g.Grad(self);
                    Matrix& din = g.MutableGrad(m);
                    for (std::size_t x = 0; x < in_rows; ++x) {
                      for (std::size_t y = 0; y < in_cols; ++y) {
                        const std::size_t r = x / s;
                        const std::size_t c = y / s;
                        const std::size_t h = std::min(in_rows, (r + 1) * s) - r * s;
                        const std::size_t w = std::min(in_cols, (c + 1) * s) - c * s;
                        din(x, y) += dout(r, c) / static_cast<double>(h * w);
                      }
                    }
                  });
}

Var Conv2dSame(Graph& g, Var m, Var kernel, Var bias) {
  CheckScalar(g, bias, "Conv2dSame bias");
  const Matrix& mv = g.Value(m);
  const Matrix& kv = g.Value(kernel);
  if (kv.rows() != kv.cols() || kv.rows() % 2 == 0) {
    throw StructuralError("Conv2dSame: kernel must be square with odd size");
  }
  const long half = static_cast<long>(kv.rows() / 2);
  const long rows = static_cast<long>(mv.rows());
  const long cols = static_cast<long>(mv.cols());
  // Visits every (output, kernel tap, input) triple inside the padded frame.
  auto for_each_tap = [half, rows, cols](auto&& fn) {
    for (long x = 0; x < rows; ++x) {
      for (long y = 0; y < cols; ++y) {
        for (long u = -half; u <= half; ++u) {
          const long sx = x + u;
          if (sx < 0 || sx >= rows) continue;
          for (long v = -half; v <= half; ++v) {
            const long sy = y + v;
            if (sy < 0 || sy >= cols) continue;
            fn(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
               static_cast<std::size_t>(u + half),
               static_cast<std::size_t>(v + half), static_cast<std::size_t>(sx),
               static_cast<std::size_t>(sy));
          }
        }
      }
    }
  };
  Matrix out(mv.rows(), mv.cols(), g.Value(bias)(0, 0));
  for_each_tap([&](std::size_t x, std::size_t y, std::size_t ku, std::size_t kv_,
                   std::size_t sx, std::size_t sy) {
    out(x, y) += kv(ku, kv_) * mv(sx, sy);
  });
  return g.Record(OpKind::kConvolution, {m, kernel, bias}, std::move(out),
                  [m, kernel, bias, for_each_tap](Graph& g, Var self) {
                    const Matrix& dout = g.Grad(self);
                    const Matrix& mv = g.Value(m);
                    const Matrix& kv = g.Value(kernel);
                    const bool need_m = g.RequiresGrad(m);
                    const bool need_k = g.RequiresGrad(kernel);
                    for_each_tap([&](std::size_t x, std::size_t y, std::size_t ku,
                                     std::size_t kv_, std::size_t sx,
                                     std::size_t sy) {
                      const double d = dout(x, y);
                      if (need_m) g.MutableGrad(m)(sx, sy) += kv(ku, kv_) * d;
                      if (need_k) g.MutableGrad(kernel)(ku, kv_) += mv(sx, sy) * d;
                    });
                    if (g.RequiresGrad(bias)) {
                      double db = 0.0;
                      for (const double d : dout.data()) db += d;
                      g.MutableGrad(bias)(0, 0) += db;
                    }
                  });
}

Var Tanh(Graph& g, Var m) {
  const Matrix& mv = g.Value(m);
  Matrix out(mv.rows(), mv.cols());
  for (std::size_t k = 0; k < mv.size(); ++k) out.data()[k] = std::tanh(mv.data()[k]);
  return g.Record(OpKind::kPiecewiseMap, {m}, std::move(out),
                  [m](Graph& g, Var self) {
                    if (!g.RequiresGrad(m)) return;
                    const Matrix& y = g.Value(self);
                    const Matrix& dy = g.Grad(self);
                    Matrix& dx = g.MutableGrad(m);
                    for (std::size_t k = 0; k < y.size(); ++k) {
                      dx.data()[k] += dy.data()[k] * (1.0 - y.data()[k] * y.data()[k]);
                    }
                  });
}

Var Assemble(Graph& g, std::span<const Var> scalars, std::size_t rows,
             std::size_t cols) {
  if (scalars.size() != rows * cols) {
    throw StructuralError("Assemble: " + std::to_string(scalars.size()) +
                          " scalars for a " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " matrix");
  }
  Matrix out(rows, cols);
  for (std::size_t k = 0; k < scalars.size(); ++k) {
    CheckScalar(g, scalars[k], "Assemble");
    out.data()[k] = g.Value(scalars[k])(0, 0);
  }
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  return g.Record(OpKind::kAssemble, inputs, std::move(out),
                  [inputs](Graph& g, Var self) {
                    const Matrix& dout = g.Grad(self);
                    for (std::size_t k = 0; k < inputs.size(); ++k) {
                      if (g.RequiresGrad(inputs[k])) {
                        g.MutableGrad(inputs[k])(0, 0) += dout.data()[k];
                      }
                    }
                  });
}

Var BatchRankingLoss(Graph& g, Var sim, const RelevanceMatrix& y,
                     const QueryLoss& loss, OpKind kind,
                     std::span<const double> kinks) {
  const Matrix& s = g.Value(sim);
  BatchLossOutput result = RankingBatchLoss(s, y, loss);
  if (g.log_decisions()) {
    std::uint64_t h = kHashSeed;
    for (std::size_t k = 0; k < s.rows(); ++k) {
      const QueryIndices idx = PartitionQueryIndices(y.row(k), k);
      h = RowPieces(s.row(k), idx.positives, idx.negatives, kinks, h);
      // Positive-positive Heaviside weights flip at a difference of 0.
      static constexpr double kZero[] = {0.0};
      h = RowPieces(s.row(k), idx.positives, idx.positives, kZero, h);
    }
    g.LogDecision(h);
  }
  auto grad = std::make_shared<Matrix>(std::move(result.grad));
  return g.Record(kind, {sim}, Matrix(1, 1, result.value),
                  [sim, grad](Graph& g, Var self) {
                    if (!g.RequiresGrad(sim)) return;
                    const double d = g.Grad(self)(0, 0);
                    View(g.MutableGrad(sim)) += d * View(*grad);
                  });
}

Var FrameRankingLoss(Graph& g, Var frame_sim, const PseudoLabelMatrix& labels,
                     const QueryLoss& loss, std::span<const double> kinks) {
  const Matrix& s = g.Value(frame_sim);
  if (s.rows() != labels.rows() || s.cols() != labels.cols()) {
    throw StructuralError("FrameRankingLoss: similarity is " +
                          std::to_string(s.rows()) + "x" +
                          std::to_string(s.cols()) + " but labels are " +
                          std::to_string(labels.rows()) + "x" +
                          std::to_string(labels.cols()));
  }
  auto grad = std::make_shared<Matrix>(s.rows(), s.cols());
  std::vector<LossOutput> rows(s.rows());
  std::vector<QueryIndices> indices(s.rows());
  std::size_t used = 0;
  std::uint64_t h = kHashSeed;
  for (std::size_t x = 0; x < s.rows(); ++x) {
    QueryContext q;
    for (std::size_t c = 0; c < s.cols(); ++c) {
      if (labels.at(x, c) == FrameLabel::kPositive) {
        indices[x].positives.push_back(c);
        q.positives.push_back(s(x, c));
      } else if (labels.at(x, c) == FrameLabel::kNegative) {
        indices[x].negatives.push_back(c);
        q.negatives.push_back(s(x, c));
      }
    }
    rows[x] = loss(q);
    if (!rows[x].skipped) ++used;
    if (g.log_decisions()) {
      h = RowPieces(s.row(x), indices[x].positives, indices[x].negatives, kinks, h);
      static constexpr double kZero[] = {0.0};
      h = RowPieces(s.row(x), indices[x].positives, indices[x].positives, kZero, h);
    }
  }
  if (g.log_decisions()) g.LogDecision(h);
  double value = 0.0;
  if (used > 0) {
    const double inv = 1.0 / static_cast<double>(used);
    for (std::size_t x = 0; x < s.rows(); ++x) {
      if (rows[x].skipped) continue;
      value += rows[x].value * inv;
      for (std::size_t a = 0; a < indices[x].positives.size(); ++a) {
        (*grad)(x, indices[x].positives[a]) += rows[x].grad_positives[a] * inv;
      }
      for (std::size_t a = 0; a < indices[x].negatives.size(); ++a) {
        (*grad)(x, indices[x].negatives[a]) += rows[x].grad_negatives[a] * inv;
      }
    }
  }
  return g.Record(OpKind::kPiecewiseMap, {frame_sim}, Matrix(1, 1, value),
                  [frame_sim, grad](Graph& g, Var self) {
                    if (!g.RequiresGrad(frame_sim)) return;
                    const double d = g.Grad(self)(0, 0);
                    View(g.MutableGrad(frame_sim)) += d * View(*grad);
                  });
}

Var BatchSshn(Graph& g, Var sim, const RelevanceMatrix& y) {
  const Matrix& s = g.Value(sim);
  if (s.rows() != s.cols() || y.size() != s.rows()) {
    throw StructuralError("BatchSshn: shape mismatch");
  }
  const std::size_t n = s.rows();
  const double inv = 1.0 / static_cast<double>(n);
  auto grad = std::make_shared<Matrix>(n, n);
  double value = 0.0;
  std::uint64_t h = kHashSeed;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t hardest = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k || y.relevant(k, j)) continue;
      if (hardest == n || s(k, j) > s(k, hardest)) hardest = j;
    }
    SshnOutput out;
    if (hardest == n) {
      out = SshnSelfOnly(s(k, k));
    } else {
      out = SshnLoss(s(k, k), s(k, hardest));
      (*grad)(k, hardest) += out.grad_negative * inv;
    }
    (*grad)(k, k) += out.grad_self * inv;
    value += out.value * inv;
    if (g.log_decisions()) {
      h = HashMix(h, hardest);
      h = HashMix(h, out.grad_self != 0.0 ? 1 : 0);
      h = HashMix(h, out.grad_negative != 0.0 ? 1 : 0);
    }
  }
  if (g.log_decisions()) g.LogDecision(h);
  return g.Record(OpKind::kPiecewiseMap, {sim}, Matrix(1, 1, value),
                  [sim, grad](Graph& g, Var self) {
                    if (!g.RequiresGrad(sim)) return;
                    const double d = g.Grad(self)(0, 0);
                    View(g.MutableGrad(sim)) += d * View(*grad);
                  });
}

}  // namespace aprank::autodiff
