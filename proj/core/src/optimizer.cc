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

#include "aprank/optimizer.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aprank/errors.h"

namespace aprank {

void OptimizerConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be > 0");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ParameterError("warmup_fraction must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) throw ParameterError("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ParameterError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
}

AdamW::AdamW(const OptimizerConfig& config, std::size_t total_steps)
    : config_(config), total_(total_steps) {
  config_.Validate();
  warmup_ = static_cast<std::size_t>(
      std::llround(config_.warmup_fraction * static_cast<double>(total_)));
}

double AdamW::LearningRate(std::size_t step) const {
  const double base = config_.learning_rate;
  if (step < warmup_) {
    return base * static_cast<double>(step + 1) / static_cast<double>(warmup_);
  }
  const std::size_t span = total_ > warmup_ ? total_ - warmup_ : 1;
  const double progress =
      std::min(1.0, static_cast<double>(step - warmup_) / static_cast<double>(span));
  return base * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void AdamW::Step(std::vector<Matrix>& params, const std::vector<Matrix>& grads) {
  if (params.size() != grads.size()) {
    throw StructuralError("AdamW: " + std::to_string(params.size()) +
                          " parameters but " + std::to_string(grads.size()) +
                          " gradients");
  }
  if (m_.empty()) {
    for (const Matrix& p : params) {
      m_.emplace_back(p.rows(), p.cols());
      v_.emplace_back(p.rows(), p.cols());
    }
  }
  if (m_.size() != params.size()) {
    throw StructuralError("AdamW: parameter count changed between steps");
  }
  const double lr = LearningRate(step_);
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = params[k];
    const Matrix& g = grads[k];
    if (p.rows() != g.rows() || p.cols() != g.cols() || p.rows() != m_[k].rows() ||
        p.cols() != m_[k].cols()) {
      throw StructuralError("AdamW: shape mismatch for parameter " +
                            std::to_string(k));
    }
    auto& pd = p.data();
    const auto& gd = g.data();
    auto& md = m_[k].data();
    auto& vd = v_[k].data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = config_.beta1 * md[i] + (1.0 - config_.beta1) * gd[i];
      vd[i] = config_.beta2 * vd[i] + (1.0 - config_.beta2) * gd[i] * gd[i];
      const double mhat = md[i] / c1;
      const double vhat = vd[i] / c2;
      pd[i] -= lr * (mhat / (std::sqrt(vhat) + config_.epsilon) +
                     config_.weight_decay * pd[i]);
    }
  }
}

}  // namespace aprank
