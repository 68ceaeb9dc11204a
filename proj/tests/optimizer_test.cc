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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "aprank/errors.h"

namespace aprank {
namespace {

TEST(AdamWTest, WarmupThenCosine) {
  OptimizerConfig c;
  c.learning_rate = 1.0;
  const AdamW opt(c, 100);
  EXPECT_EQ(opt.warmup_steps(), 5u);
  EXPECT_DOUBLE_EQ(opt.LearningRate(0), 0.2);
  EXPECT_DOUBLE_EQ(opt.LearningRate(4), 1.0);
  EXPECT_DOUBLE_EQ(opt.LearningRate(5), 1.0);
  EXPECT_NEAR(opt.LearningRate(5 + 95 / 2), 0.5 * (1.0 + std::cos(std::numbers::pi * 47.0 / 95.0)),
              1e-15);
  for (std::size_t s = 6; s < 100; ++s) EXPECT_LE(opt.LearningRate(s), opt.LearningRate(s - 1));
  EXPECT_GE(opt.LearningRate(99), 0.0);
}

TEST(AdamWTest, FirstStepMovesBySignTimesRate) {
  // Bias correction makes the first update lr * g / (|g| + eps).
  OptimizerConfig c;
  c.learning_rate = 0.1;
  c.warmup_fraction = 0.0;
  c.weight_decay = 0.0;
  AdamW opt(c, 10);
  std::vector<Matrix> p{Matrix::FromRows({{1.0, -2.0}})};
  const std::vector<Matrix> g{Matrix::FromRows({{3.0, -0.5}})};
  opt.Step(p, g);
  EXPECT_NEAR(p[0](0, 0), 1.0 - 0.1, 1e-8);
  EXPECT_NEAR(p[0](0, 1), -2.0 + 0.1, 1e-8);
  EXPECT_EQ(opt.steps_taken(), 1u);
  EXPECT_NEAR(opt.first_moments()[0](0, 0), 0.3, 1e-15);
}

TEST(AdamWTest, DecoupledDecayWithZeroGradient) {
  OptimizerConfig c;
  c.learning_rate = 0.1;
  c.warmup_fraction = 0.0;
  c.weight_decay = 0.5;
  AdamW opt(c, 10);
  std::vector<Matrix> p{Matrix(1, 1, 2.0)};
  opt.Step(p, {Matrix(1, 1, 0.0)});
  EXPECT_DOUBLE_EQ(p[0](0, 0), 2.0 - 0.1 * 0.5 * 2.0);
}

TEST(AdamWTest, MinimizesQuadratic) {
  OptimizerConfig c;
  c.learning_rate = 0.05;
  c.weight_decay = 0.0;
  AdamW opt(c, 2000);
  std::vector<Matrix> p{Matrix::FromRows({{3.0, -4.0}})};
  for (int s = 0; s < 2000; ++s) {
    const Matrix g = Matrix::FromRows({{2.0 * (p[0](0, 0) - 1.0), 2.0 * (p[0](0, 1) + 1.0)}});
    opt.Step(p, {g});
  }
  EXPECT_NEAR(p[0](0, 0), 1.0, 1e-3);
  EXPECT_NEAR(p[0](0, 1), -1.0, 1e-3);
}

TEST(AdamWTest, Validation) {
  OptimizerConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(AdamW(c, 10), ParameterError);
  c = OptimizerConfig{};
  c.beta2 = 1.0;
  EXPECT_THROW(c.Validate(), ParameterError);
  c = OptimizerConfig{};
  c.warmup_fraction = 1.0;
  EXPECT_THROW(c.Validate(), ParameterError);
  AdamW opt(OptimizerConfig{}, 10);
  std::vector<Matrix> p{Matrix(1, 2)};
  EXPECT_THROW(opt.Step(p, {}), StructuralError);
  EXPECT_THROW(opt.Step(p, {Matrix(2, 1)}), StructuralError);
}

}  // namespace
}  // namespace aprank
