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

// Shared plumbing of the aprank subcommands: exit codes, output locations,
// list parsing and report serialization.

#ifndef APRANK_TOOLS_CLI_COMMON_H_
#define APRANK_TOOLS_CLI_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aprank/metrics.h"
#include "aprank/run_config.h"
#include "aprank/trainer.h"
#include "json.hpp"

namespace aprank::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Bad flags, bad config or unusable input files: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A result that fails a numeric check (oracle mismatch): exit 3.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  bool deterministic = false;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out_dir;  // Empty: $APRANK_OUT_DIR, then ".".
  std::size_t threads = 1;
};

// Creates the directory when missing.
std::string OutputDir(const GlobalOptions& g);

std::vector<std::string> SplitList(const std::string& text);
std::vector<double> ParseDoubles(const std::string& text, const std::string& flag);
std::vector<std::uint64_t> ParseSeeds(const std::string& text);

// Shortest text that parses back to the same double.
std::string FormatDouble(double v);

void WriteText(const std::string& path, const std::string& text);
std::string JoinPath(const std::string& dir, const std::string& name);

// Tool name, version and source revision.
Json Stamp();
Json ConfigJson(const TrainConfig& cfg);
Json MetricJson(const MetricReport& r);
Json LossJson(const LossBreakdown& l);

// Resolves --preset, --config and --set KEY=VALUE into a validated config.
// Throws UsageError with the schema diagnostics on failure.
TrainConfig ResolveTrainConfig(const std::string& preset,
                               const std::string& config_path,
                               const std::vector<std::string>& overrides);

double Median(std::vector<double> v);

// Deterministic reports omit timings; these go to a separate file instead.
void RecordTiming(const GlobalOptions& g, const std::string& dir,
                  const std::string& command, double seconds, Json& report);

}  // namespace aprank::cli

#endif  // APRANK_TOOLS_CLI_COMMON_H_
