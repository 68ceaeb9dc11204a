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
#include <filesystem>
#include <iostream>
#include <sstream>

#include "aprank/tensor_io.h"
#include "commands.h"

namespace aprank::cli {
namespace {

std::string HistoryCsv(const TrainResult& r) {
  std::ostringstream out;
  out << "iteration,learning_rate,total,video,frame,nce,sshn\n";
  for (const IterationRecord& h : r.history) {
    out << h.iteration << ',' << FormatDouble(h.learning_rate) << ','
        << FormatDouble(h.loss.total) << ',' << FormatDouble(h.loss.video) << ','
        << FormatDouble(h.loss.frame) << ',' << FormatDouble(h.loss.nce) << ','
        << FormatDouble(h.loss.sshn) << '\n';
  }
  return out.str();
}

std::string EvalCsv(const TrainResult& r) {
  std::ostringstream out;
  out << "iteration,mean_ap,micro_ap\n";
  for (const EvalRecord& e : r.evals) {
    out << e.iteration << ',' << FormatDouble(e.mean_ap) << ','
        << FormatDouble(e.micro_ap) << '\n';
  }
  return out.str();
}

std::string HexHash(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

struct RunOutcome {
  double mean_ap = 0.0;
  double micro_ap = 0.0;
};

// Trains one configuration and writes its artifacts into `dir`.
RunOutcome TrainOne(const GlobalOptions& g, const TrainConfig& cfg,
                    const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t hash = ConfigHash(cfg);
  TrainResult result;
  try {
    result = Train(cfg);
  } catch (const TrainingDiverged& e) {
    const std::string ckpt = JoinPath(dir, "snapshot.ckpt");
    WriteCheckpoint(ckpt, {e.model(), hash});
    const Json snap{{"error", e.what()},
                    {"iteration", e.iteration()},
                    {"loss", LossJson(e.loss())},
                    {"config", ConfigJson(cfg)},
                    {"checkpoint", "snapshot.ckpt"}};
    const std::string path = JoinPath(dir, "snapshot.json");
    WriteText(path, snap.dump(2) + "\n");
    throw NumericFailure(std::string(e.what()) + "; snapshot written to " + path);
  }
  WriteCheckpoint(JoinPath(dir, "model.ckpt"), {result.model, hash});
  WriteText(JoinPath(dir, "history.csv"), HistoryCsv(result));
  WriteText(JoinPath(dir, "evals.csv"), EvalCsv(result));
  WriteText(JoinPath(dir, "config.txt"), FormatConfig(DescribeConfig(cfg)));

  Json loss_rows = Json::array();
  for (const IterationRecord& h : result.history) {
    Json row = LossJson(h.loss);
    row["iteration"] = h.iteration;
    row["learning_rate"] = h.learning_rate;
    loss_rows.push_back(row);
  }
  Json evals = Json::array();
  for (const EvalRecord& e : result.evals) {
    evals.push_back({{"iteration", e.iteration},
                     {"mean_ap", e.mean_ap},
                     {"micro_ap", e.micro_ap}});
  }
  Json report{{"command", "train"},
              {"stamp", Stamp()},
              {"seed", cfg.seed},
              {"deterministic", g.deterministic},
              {"config", ConfigJson(cfg)},
              {"config_hash", HexHash(hash)},
              {"artifacts",
               {{"checkpoint", "model.ckpt"},
                {"history", "history.csv"},
                {"evals", "evals.csv"},
                {"config", "config.txt"}}},
              {"loss_rows", loss_rows},
              {"evals", evals},
              {"final", MetricJson(result.final_metrics)}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RecordTiming(g, dir, "train", seconds, report);
  WriteText(JoinPath(dir, "report.json"), report.dump(2) + "\n");
  return {result.final_metrics.mean_ap, result.final_metrics.micro_ap};
}

}  // namespace

CLI::App* AddTrain(CLI::App& parent, TrainOptions& opts) {
  CLI::App* cmd = parent.add_subcommand(
      "train", "Train the student map on a synthetic corpus and report held-out mAP/uAP");
  cmd->add_option("--preset", opts.preset, "Starting configuration: easy|hard")
      ->capture_default_str();
  cmd->add_option("--config", opts.config, "key = value run configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "Override one key, e.g. --set loss.lambda_f=0");
  cmd->add_option("--losses", opts.losses,
                  "Comma list of video losses (quadlinear|smooth|triplet|contrastive|none); "
                  "more than one runs a comparison");
  cmd->add_option("--seeds", opts.seeds, "Comma list of seeds; medians are reported");
  cmd->add_option("--iterations", opts.iterations, "Override the iteration count");
  return cmd;
}

int RunTrain(const GlobalOptions& g, const TrainOptions& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (opts.iterations >= 0) overrides.push_back("iterations=" + std::to_string(opts.iterations));
  if (g.seed_given) overrides.push_back("seed=" + std::to_string(g.seed));
  overrides.push_back("num_threads=" + std::to_string(g.deterministic ? 1 : g.threads));
  const TrainConfig base = ResolveTrainConfig(opts.preset, opts.config, overrides);

  std::vector<VideoLoss> losses;
  for (const std::string& name : SplitList(opts.losses)) {
    const auto l = ParseVideoLoss(name);
    if (!l) throw UsageError("unknown loss '" + name + "'");
    losses.push_back(*l);
  }
  if (losses.empty()) losses.push_back(base.video_loss);
  const std::vector<std::uint64_t> seeds =
      opts.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : ParseSeeds(opts.seeds);
  const std::string dir = OutputDir(g);

  if (losses.size() == 1 && seeds.size() == 1) {
    TrainConfig cfg = base;
    cfg.video_loss = losses[0];
    cfg.seed = seeds[0];
    const RunOutcome r = TrainOne(g, cfg, dir);
    std::cout << "final mAP " << FormatDouble(r.mean_ap) << " uAP "
              << FormatDouble(r.micro_ap) << "\nwrote " << JoinPath(dir, "report.json")
              << "\n";
    return kExitOk;
  }

  const auto start = std::chrono::steady_clock::now();
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "loss,runs,median_mean_ap,median_micro_ap\n";
  for (const VideoLoss loss : losses) {
    std::vector<double> maps;
    std::vector<double> uaps;
    Json runs = Json::array();
    for (const std::uint64_t seed : seeds) {
      TrainConfig cfg = base;
      cfg.video_loss = loss;
      cfg.seed = seed;
      const std::string sub = std::string(VideoLossName(loss)) + "/seed" + std::to_string(seed);
      const RunOutcome r = TrainOne(g, cfg, JoinPath(dir, sub));
      maps.push_back(r.mean_ap);
      uaps.push_back(r.micro_ap);
      runs.push_back({{"seed", seed},
                      {"mean_ap", r.mean_ap},
                      {"micro_ap", r.micro_ap},
                      {"report", sub + "/report.json"}});
    }
    rows.push_back({{"loss", VideoLossName(loss)},
                    {"median_mean_ap", Median(maps)},
                    {"median_micro_ap", Median(uaps)},
                    {"runs", runs}});
    csv << VideoLossName(loss) << ',' << seeds.size() << ',' << FormatDouble(Median(maps))
        << ',' << FormatDouble(Median(uaps)) << '\n';
    std::cout << VideoLossName(loss) << ": median mAP " << FormatDouble(Median(maps))
              << " median uAP " << FormatDouble(Median(uaps)) << "\n";
  }
  Json report{{"command", "train-comparison"},
              {"stamp", Stamp()},
              {"seeds", seeds},
              {"deterministic", g.deterministic},
              {"config", ConfigJson(base)},
              {"losses", rows}};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RecordTiming(g, dir, "comparison", seconds, report);
  WriteText(JoinPath(dir, "comparison.csv"), csv.str());
  WriteText(JoinPath(dir, "comparison.json"), report.dump(2) + "\n");
  std::cout << "wrote " << JoinPath(dir, "comparison.json") << "\n";
  return kExitOk;
}

}  // namespace aprank::cli
