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

// Average-precision risks over a QueryContext and the pairwise baselines they
// are compared against. Every differentiable loss returns its value together
// with the analytic gradient with respect to each positive and negative score.

#ifndef APRANK_SURROGATE_LOSSES_H_
#define APRANK_SURROGATE_LOSSES_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "aprank/matrix.h"
#include "aprank/ranking_core.h"

namespace aprank {

// Margin delta > 0 of the positive-negative surrogate and weight rho >= 0 of
// the positive-positive Heaviside count.
struct QuadLinearParams {
  double delta = 0.05;
  double rho = 0.10;

  void Validate() const;
};

// Temperature of the sigmoid surrogate, tau > 0.
struct SmoothApParams {
  double tau = 0.01;

  void Validate() const;
};

struct LossOutput {
  double value = 0.0;
  std::vector<double> grad_positives;
  std::vector<double> grad_negatives;
  // True when the query had no positives and contributes nothing.
  bool skipped = false;
};

// Quadratic-then-linear penalty for a positive-negative gap x = s_neg - s_pos:
//   (2/delta) x + 1        x >= 0
//   (x/delta + 1)^2        -delta <= x < 0
//   0                      x < -delta
double RMinus(double x, double delta);
double RMinusGrad(double x, double delta);

// Positive-positive weight: the exact Heaviside, zero gradient.
inline double RPlus(double x) { return Heaviside(x); }

// G(x; tau) = 1 / (1 + exp(-x / tau)), evaluated without overflow.
double SigmoidSurrogate(double x, double tau);
double SigmoidSurrogateGrad(double x, double tau);

// Generic reformulated AP risk
//   (1/|S+|) sum_i h( sum_{j in S-} neg_term(d_ji) /
//                     (1 + rho sum_{p in S+} pos_term(d_pi)) ),  h(u) = u/(1+u)
// with d_ji = s_j - s_i. Returns nullopt when S+ is empty.
std::optional<double> ApRiskForm(const QueryContext& q,
                                 const std::function<double(double)>& neg_term,
                                 const std::function<double(double)>& pos_term,
                                 double rho);

// QuadLinear-AP risk of one query. The rho-weighted Heaviside denominator is a
// constant weight for differentiation.
LossOutput QuadLinearApRisk(const QueryContext& q, const QuadLinearParams& p);

// Exact 1 - AP of one query; nullopt when there are no positives.
std::optional<double> HeavisideApRisk(const QueryContext& q);

// Smooth-AP: every Heaviside of the exact risk replaced by G(.; tau),
// including positive-positive terms. The self pair j == i is not counted.
LossOutput SmoothApRisk(const QueryContext& q, const SmoothApParams& p);

// Mean over all positive-negative pairs of max(0, s_neg - s_pos + margin).
LossOutput TripletLoss(const QueryContext& q, double margin = 0.2);

// Mean over the terms (1 - s_pos) for positives and max(0, s_neg - margin)
// for negatives.
LossOutput ContrastiveLoss(const QueryContext& q, double margin = 0.2);

using QueryLoss = std::function<LossOutput(const QueryContext&)>;

struct BatchLossOutput {
  double value = 0.0;
  // Conformal to the similarity matrix; zero on the diagonal and skipped rows.
  Matrix grad;
  std::size_t num_queries = 0;
};

// Mean of a per-query loss over the rows of a square similarity matrix. Rows
// with no positives are left out of the mean.
BatchLossOutput RankingBatchLoss(const Matrix& sim, const RelevanceMatrix& y,
                                 const QueryLoss& loss);

// Video-level QuadLinear-AP objective over a batch.
BatchLossOutput QuadLinearApBatchLoss(const Matrix& sim,
                                      const RelevanceMatrix& y,
                                      const QuadLinearParams& p);

}  // namespace aprank

#endif  // APRANK_SURROGATE_LOSSES_H_
