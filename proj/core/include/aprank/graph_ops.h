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

// Differentiable ops for the training pipeline, recorded on an
// autodiff::Graph. Each op mirrors a forward function of the similarity,
// loss or pseudo-label modules and adds its backward rule.

#ifndef APRANK_GRAPH_OPS_H_
#define APRANK_GRAPH_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "aprank/autodiff.h"
#include "aprank/pseudo_labels.h"
#include "aprank/ranking_core.h"
#include "aprank/surrogate_losses.h"

namespace aprank::autodiff {

// a (m x k) times b (n x k) transposed: m x n.
Var MatMulBT(Graph& g, Var a, Var b);

// Each row divided by its L2 norm. Throws DegenerateInputError on a zero row.
Var NormalizeRows(Graph& g, Var a);

// 1 x 1 mean of all entries.
Var Mean(Graph& g, Var a);

// 1 x 1 sum_i weights[i] * terms[i]; every term must be 1 x 1.
Var WeightedSum(Graph& g, std::span<const Var> terms,
                std::span<const double> weights);

// Input is the (T R) x (T' R') patch cosine matrix with row x * R + i and
// column y * R' + j. Output T x T' with entry (1/(R K)) times the sum over i
// of the K largest entries among j. Gradient reaches only the selected K.
Var SpatialTopKChamfer(Graph& g, Var patch_sim, std::size_t frames,
                       std::size_t patches, std::size_t candidate_frames,
                       std::size_t candidate_patches, std::size_t k);

// 1 x 1: (1/(T K)) sum over rows of the K largest entries.
Var TemporalTopKChamfer(Graph& g, Var frame_sim, std::size_t k);

// clamp(scale * m + bias, -1, 1) with 1 x 1 scale and bias.
Var AffineClamp(Graph& g, Var m, Var scale, Var bias);

// Mean over s x s blocks (edge blocks cover fewer entries).
Var BlockAverage(Graph& g, Var m, std::size_t s);

// Zero-padded "same" 2D convolution with an odd square kernel plus a 1 x 1
// bias.
Var Conv2dSame(Graph& g, Var m, Var kernel, Var bias);

Var Tanh(Graph& g, Var m);

// rows x cols matrix whose entry r * cols + c is scalars[r * cols + c].
Var Assemble(Graph& g, std::span<const Var> scalars, std::size_t rows,
             std::size_t cols);

// RankingBatchLoss as a graph op. `kinks` lists the score differences at
// which `loss` changes smooth piece (e.g. {-delta, 0}); crossings are logged
// as decisions.
Var BatchRankingLoss(Graph& g, Var sim, const RelevanceMatrix& y,
                     const QueryLoss& loss, OpKind kind,
                     std::span<const double> kinks);

// Mean of `loss` over the non-skipped rows of a frame similarity matrix split
// by pseudo labels. Returns 0 when every row is skipped.
Var FrameRankingLoss(Graph& g, Var frame_sim, const PseudoLabelMatrix& labels,
                     const QueryLoss& loss, std::span<const double> kinks);

// (1/N) sum_k SSHN(s_kk, max_{j in S-} s_kj).
Var BatchSshn(Graph& g, Var sim, const RelevanceMatrix& y);

}  // namespace aprank::autodiff

#endif  // APRANK_GRAPH_OPS_H_
