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

// Subcommands of the aprank tool. Each Add* registers flags on `parent`
// bound to `opts`; each Run* returns a process exit code and throws
// UsageError / NumericFailure for the documented failure modes.

#ifndef APRANK_TOOLS_COMMANDS_H_
#define APRANK_TOOLS_COMMANDS_H_

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_common.h"

namespace aprank::cli {

struct BenchLossOptions {
  std::string losses = "quadlinear,smooth";
  double delta = 0.05;
  double rho = 0.10;
  double tau = 0.01;
  double margin = 0.2;
  int seeds = 5;
};
CLI::App* AddBenchLoss(CLI::App& parent, BenchLossOptions& opts);
int RunBenchLoss(const GlobalOptions& g, const BenchLossOptions& opts);

struct TrainOptions {
  std::string preset = "easy";
  std::string config;
  std::vector<std::string> overrides;
  std::string losses;  // Empty: the configured video loss.
  std::string seeds;   // Empty: the global --seed.
  int iterations = -1;
};
CLI::App* AddTrain(CLI::App& parent, TrainOptions& opts);
int RunTrain(const GlobalOptions& g, const TrainOptions& opts);

struct EvalOptions {
  std::string input;
  std::string scores;
  std::string labels;
  bool verify = false;
};
CLI::App* AddEval(CLI::App& parent, EvalOptions& opts);
int RunEval(const GlobalOptions& g, const EvalOptions& opts);

struct AblateOptions {
  std::string axis;
  std::string grid;
  std::string preset = "hard";
  std::string config;
  std::vector<std::string> overrides;
  std::string seeds;
  std::string checkpoint;
  int iterations = -1;
};
CLI::App* AddAblate(CLI::App& parent, AblateOptions& opts);
int RunAblate(const GlobalOptions& g, const AblateOptions& opts);

}  // namespace aprank::cli

#endif  // APRANK_TOOLS_COMMANDS_H_
