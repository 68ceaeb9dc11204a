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

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include "aprank/base_losses.h"
#include "aprank/surrogate_losses.h"
#include "commands.h"

namespace aprank::cli {
namespace {

// Gap sweep: x = i / 100 for i in [-100, 100].
constexpr int kSweepHalf = 100;

// Score gap at which the two surrogates are contrasted.
constexpr double kContrastGap = 0.5;

struct Curve {
  double value;
  double grad;
};

Curve Evaluate(const std::string& loss, double x, const BenchLossOptions& o) {
  if (loss == "quadlinear") return {RMinus(x, o.delta), RMinusGrad(x, o.delta)};
  if (loss == "smooth") return {SigmoidSurrogate(x, o.tau), SigmoidSurrogateGrad(x, o.tau)};
  // Triplet hinge on the negative-minus-positive gap.
  return {std::max(0.0, x + o.margin), x + o.margin > 0.0 ? 1.0 : 0.0};
}

LossOutput QueryRisk(const std::string& loss, const QueryContext& q,
                     const BenchLossOptions& o) {
  if (loss == "quadlinear") return QuadLinearApRisk(q, {o.delta, o.rho});
  if (loss == "smooth") return SmoothApRisk(q, {o.tau});
  return TripletLoss(q, o.margin);
}

}  // namespace

CLI::App* AddBenchLoss(CLI::App& parent, BenchLossOptions& opts) {
  CLI::App* cmd = parent.add_subcommand(
      "bench-loss",
      "Tabulate surrogate value and gradient over a score-gap sweep and run the "
      "gradient-vanishing contrast check");
  cmd->add_option("--losses", opts.losses, "Comma list of quadlinear|smooth|triplet")
      ->capture_default_str();
  cmd->add_option("--delta", opts.delta, "QuadLinear margin delta")->capture_default_str();
  cmd->add_option("--rho", opts.rho, "QuadLinear positive-pair weight rho")
      ->capture_default_str();
  cmd->add_option("--tau", opts.tau, "Sigmoid temperature tau")->capture_default_str();
  cmd->add_option("--margin", opts.margin, "Triplet margin")->capture_default_str();
  cmd->add_option("--seeds", opts.seeds, "Random query contexts scored per loss")
      ->capture_default_str();
  return cmd;
}

int RunBenchLoss(const GlobalOptions& g, const BenchLossOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> losses = SplitList(opts.losses);
  if (losses.empty()) throw UsageError("--losses: empty list");
  for (const std::string& l : losses) {
    if (l != "quadlinear" && l != "smooth" && l != "triplet") {
      throw UsageError("unknown loss '" + l + "' (expected quadlinear|smooth|triplet)");
    }
  }
  if (!(opts.delta > 0.0)) throw UsageError("--delta must be > 0");
  if (!(opts.tau > 0.0)) throw UsageError("--tau must be > 0");
  if (!(opts.rho >= 0.0)) throw UsageError("--rho must be >= 0");
  if (opts.seeds < 0) throw UsageError("--seeds must be >= 0");
  const std::string dir = OutputDir(g);

  std::ostringstream csv;
  csv << "loss,x,value,grad\n";
  for (const std::string& loss : losses) {
    for (int i = -kSweepHalf; i <= kSweepHalf; ++i) {
      const double x = static_cast<double>(i) / 100.0;
      const Curve c = Evaluate(loss, x, opts);
      csv << loss << ',' << FormatDouble(x) << ',' << FormatDouble(c.value) << ','
          << FormatDouble(c.grad) << '\n';
    }
  }

  const double quad_grad = std::abs(RMinusGrad(kContrastGap, opts.delta));
  const double sig_grad = std::abs(SigmoidSurrogateGrad(kContrastGap, opts.tau));
  const double ratio = sig_grad > 0.0 ? quad_grad / sig_grad : INFINITY;
  Json contrast{{"gap", kContrastGap},
                {"quadlinear_grad", quad_grad},
                {"sigmoid_grad", sig_grad},
                {"ratio", std::isinf(ratio) ? Json("inf") : Json(ratio)},
                {"ratio_exceeds_1e15", ratio > 1e15}};

  // Random query contexts: mean risk and mean gradient norm per loss.
  Json instances = Json::object();
  for (const std::string& loss : losses) {
    std::mt19937_64 rng(g.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double value_sum = 0.0;
    double grad_sum = 0.0;
    for (int s = 0; s < opts.seeds; ++s) {
      QueryContext q;
      for (int k = 0; k < 4; ++k) q.positives.push_back(u(rng));
      for (int k = 0; k < 12; ++k) q.negatives.push_back(u(rng));
      const LossOutput out = QueryRisk(loss, q, opts);
      double sq = 0.0;
      for (const double v : out.grad_positives) sq += v * v;
      for (const double v : out.grad_negatives) sq += v * v;
      value_sum += out.value;
      grad_sum += std::sqrt(sq);
    }
    const double n = std::max(1, opts.seeds);
    instances[loss] = Json{{"queries", opts.seeds},
                           {"mean_value", value_sum / n},
                           {"mean_grad_norm", grad_sum / n}};
  }

  Json report{{"command", "bench-loss"},
              {"stamp", Stamp()},
              {"seed", g.seed},
              {"deterministic", g.deterministic},
              {"params",
               {{"losses", losses},
                {"delta", opts.delta},
                {"rho", opts.rho},
                {"tau", opts.tau},
                {"margin", opts.margin},
                {"seeds", opts.seeds}}},
              {"sweep_csv", "bench_loss.csv"},
              {"contrast", contrast},
              {"random_queries", instances}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RecordTiming(g, dir, "bench_loss", seconds, report);
  WriteText(JoinPath(dir, "bench_loss.csv"), csv.str());
  WriteText(JoinPath(dir, "bench_loss.json"), report.dump(2) + "\n");
  std::cout << "gradient contrast at gap " << kContrastGap << ": |R-'| = "
            << FormatDouble(quad_grad) << ", |G'| = " << FormatDouble(sig_grad) << "\n"
            << "wrote " << JoinPath(dir, "bench_loss.csv") << " and "
            << JoinPath(dir, "bench_loss.json") << "\n";
  return kExitOk;
}

}  // namespace aprank::cli
