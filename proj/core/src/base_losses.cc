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

#include "aprank/base_losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "aprank/errors.h"

namespace aprank {

LossOutput InfoNceLoss(const QueryContext& q, double tau) {
  if (!(tau > 0.0)) {
    throw ParameterError("InfoNCE temperature must be > 0, got " +
                         std::to_string(tau));
  }
  LossOutput out;
  out.grad_negatives.assign(q.negatives.size(), 0.0);
  if (q.positives.empty()) {
    out.skipped = true;
    return out;
  }
  const std::size_t np = q.positives.size();
  const std::size_t nn = q.negatives.size();
  out.grad_positives.assign(np, 0.0);
  const double inv_np = 1.0 / static_cast<double>(np);
  double neg_max = -std::numeric_limits<double>::infinity();
  for (const double s : q.negatives) neg_max = std::max(neg_max, s / tau);
  std::vector<double> weights(nn);
  for (std::size_t i = 0; i < np; ++i) {
    const double zi = q.positives[i] / tau;
    const double shift = std::max(zi, neg_max);
    double total = std::exp(zi - shift);
    for (std::size_t j = 0; j < nn; ++j) {
      weights[j] = std::exp(q.negatives[j] / tau - shift);
      total += weights[j];
    }
    const double lse = shift + std::log(total);
    out.value += (lse - zi) * inv_np;
    const double self_weight = std::exp(zi - shift) / total;
    out.grad_positives[i] += inv_np * (self_weight - 1.0) / tau;
    for (std::size_t j = 0; j < nn; ++j) {
      out.grad_negatives[j] += inv_np * (weights[j] / total) / tau;
    }
  }
  return out;
}

SshnOutput SshnSelfOnly(double self_sim) {
  if (!std::isfinite(self_sim)) {
    throw DegenerateInputError("SSHN: non-finite self-similarity");
  }
  SshnOutput out;
  const double s = std::clamp(self_sim, kSshnEpsilon, 1.0);
  out.value = -std::log(s);
  if (self_sim >= kSshnEpsilon && self_sim <= 1.0) out.grad_self = -1.0 / s;
  return out;
}

SshnOutput SshnLoss(double self_sim, double hardest_negative) {
  if (!std::isfinite(hardest_negative)) {
    throw DegenerateInputError("SSHN: non-finite negative similarity");
  }
  SshnOutput out = SshnSelfOnly(self_sim);
  const double hn = std::clamp(hardest_negative, 0.0, 1.0 - kSshnEpsilon);
  out.value -= std::log(1.0 - hn);
  if (hardest_negative >= 0.0 && hardest_negative <= 1.0 - kSshnEpsilon) {
    out.grad_negative = 1.0 / (1.0 - hn);
  }
  return out;
}

}  // namespace aprank
