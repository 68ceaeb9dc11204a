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

#include <iostream>

#include "CLI11.hpp"
#include "aprank/errors.h"
#include "commands.h"

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage or configuration error (bad flags, bad config, bad input files)\n"
    "  3  numeric failure (non-finite training loss, oracle mismatch)\n"
    "\n"
    "Reports go to --out, else $APRANK_OUT_DIR, else the working directory.";

}  // namespace

int main(int argc, char** argv) {
  using namespace aprank::cli;  // NOLINT(build/namespaces)

  CLI::App app{"aprank: average-precision ranking losses, retrieval metrics and a "
               "synthetic training harness"};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_flag("--deterministic", g.deterministic,
               "Single-threaded numerics; wall-clock timings move to a separate file");
  app.add_option("--seed", g.seed, "Seed for corpus, initialization and sampling")
      ->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_option("--threads", g.threads, "Evaluation worker threads")
      ->check(CLI::PositiveNumber);

  BenchLossOptions bench;
  TrainOptions train;
  EvalOptions eval;
  AblateOptions ablate;
  CLI::App* bench_cmd = AddBenchLoss(app, bench);
  CLI::App* train_cmd = AddTrain(app, train);
  CLI::App* eval_cmd = AddEval(app, eval);
  CLI::App* ablate_cmd = AddAblate(app, ablate);
  for (CLI::App* sub : {bench_cmd, train_cmd, eval_cmd, ablate_cmd}) sub->footer(kExitCodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bench_cmd) return RunBenchLoss(g, bench);
    if (*train_cmd) return RunTrain(g, train);
    if (*eval_cmd) return RunEval(g, eval);
    if (*ablate_cmd) return RunAblate(g, ablate);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const aprank::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const aprank::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
