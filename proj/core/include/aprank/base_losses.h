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

// Representation-learning terms that accompany the AP objectives: InfoNCE over
// a query's positives and negatives, and the self-similarity / hardest
// negative log loss.

#ifndef APRANK_BASE_LOSSES_H_
#define APRANK_BASE_LOSSES_H_

#include "aprank/surrogate_losses.h"

namespace aprank {

// -(1/|S+|) sum_i log( e^{s_i/tau} / (e^{s_i/tau} + sum_j e^{s_j/tau}) ),
// evaluated with a shifted log-sum-exp.
LossOutput InfoNceLoss(const QueryContext& q, double tau);

struct SshnOutput {
  double value = 0.0;
  double grad_self = 0.0;
  double grad_negative = 0.0;
};

// Keeps logs away from their singularities.
inline constexpr double kSshnEpsilon = 1e-6;

// -log(s_kk) - log(1 - s_hn) with s_kk clamped to [eps, 1] and the hardest
// negative s_hn clamped to [0, 1 - eps]. Gradients are zero where a clamp is
// active. Throws DegenerateInputError on non-finite input.
SshnOutput SshnLoss(double self_sim, double hardest_negative);

// Self-similarity term only, for queries without negatives.
SshnOutput SshnSelfOnly(double self_sim);

}  // namespace aprank

#endif  // APRANK_BASE_LOSSES_H_
