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

// Adaptive-moment optimizer with decoupled weight decay, driven by a linear
// warm-up followed by cosine decay.

#ifndef APRANK_OPTIMIZER_H_
#define APRANK_OPTIMIZER_H_

#include <cstddef>
#include <vector>

#include "aprank/matrix.h"

namespace aprank {

struct OptimizerConfig {
  double learning_rate = 4e-4;
  double warmup_fraction = 0.05;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
};

class AdamW {
 public:
  // `total_steps` is the cosine horizon; warm-up covers
  // round(warmup_fraction * total_steps) steps.
  AdamW(const OptimizerConfig& config, std::size_t total_steps);

  // Rate used by the update with 0-based index `step`.
  double LearningRate(std::size_t step) const;

  // One update of every parameter from its gradient. Shapes must not change
  // between calls.
  void Step(std::vector<Matrix>& params, const std::vector<Matrix>& grads);

  std::size_t steps_taken() const { return step_; }
  std::size_t warmup_steps() const { return warmup_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  OptimizerConfig config_;
  std::size_t total_;
  std::size_t warmup_;
  std::size_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace aprank

#endif  // APRANK_OPTIMIZER_H_
