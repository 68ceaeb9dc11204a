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
#include <iostream>
#include <sstream>

#include "aprank/similarity.h"
#include "aprank/synthetic.h"
#include "aprank/tensor_io.h"
#include "commands.h"

namespace aprank::cli {
namespace {

bool IsEvalOnly(const std::string& axis) { return axis == "k_t" || axis == "k_s"; }

// Config overrides realizing one grid point of a training axis.
std::vector<std::string> AxisOverrides(const std::string& axis, double v) {
  const std::string s = FormatDouble(v);
  if (axis == "delta_v") return {"loss.delta_v=" + s};
  if (axis == "delta_f") return {"loss.delta_f=" + s};
  if (axis == "rho_v") return {"loss.rho_v=" + s};
  if (axis == "rho_f") return {"loss.rho_f=" + s};
  if (axis == "lambda_f") return {"loss.lambda_f=" + s};
  if (axis == "rates") return {"labels.top=" + s, "labels.bottom=" + s};
  if (axis == "k_t") return {"aggregation.k_t=" + s};
  if (axis == "k_s") return {"aggregation.k_s=" + s};
  throw UsageError("unknown axis '" + axis +
                   "' (expected k_t|k_s|delta_v|delta_f|rho_v|rho_f|lambda_f|rates)");
}

std::vector<PatchEmbeddings> EmbedAll(const Model& model, const std::vector<Clip>& clips) {
  std::vector<PatchEmbeddings> out;
  out.reserve(clips.size());
  for (const Clip& c : clips) out.push_back(Embed(model, c.student));
  return out;
}

// Retrieval metrics from a precomputed N x N similarity matrix.
MetricReport MetricsFromSimilarity(const Matrix& sim, const std::vector<Clip>& clips) {
  std::vector<ScoredList> queries(clips.size());
  for (std::size_t q = 0; q < clips.size(); ++q) {
    for (std::size_t c = 0; c < clips.size(); ++c) {
      if (c == q) continue;
      queries[q].scores.push_back(sim(q, c));
      queries[q].labels.push_back(clips[c].group == clips[q].group ? 1 : 0);
    }
  }
  return EvaluateQueries(queries);
}

// Video similarity with temporal average pooling in place of TopK-Chamfer.
Matrix MeanPoolingSimilarity(const std::vector<PatchEmbeddings>& e,
                             const AggregationParams& p, const RefinerParams& r) {
  Matrix out(e.size(), e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      out(i, j) = MeanPooling(Refine(SpatialTopKChamfer(PatchSimilarity(e[i], e[j]), p.k_s), r));
    }
  }
  return out;
}

}  // namespace

CLI::App* AddAblate(CLI::App& parent, AblateOptions& opts) {
  CLI::App* cmd = parent.add_subcommand(
      "ablate",
      "Sweep one hyperparameter and tabulate held-out mAP/uAP. k_t and k_s only "
      "re-evaluate a model; the other axes retrain at every grid point");
  cmd->add_option("--axis", opts.axis, "k_t|k_s|delta_v|delta_f|rho_v|rho_f|lambda_f|rates")
      ->required();
  cmd->add_option("--grid", opts.grid, "Comma list of values")->required();
  cmd->add_option("--preset", opts.preset, "Starting configuration: easy|hard")
      ->capture_default_str();
  cmd->add_option("--config", opts.config, "key = value run configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides, "Override one key, e.g. --set loss.lambda_f=0");
  cmd->add_option("--seeds", opts.seeds, "Comma list of seeds for training axes");
  cmd->add_option("--checkpoint", opts.checkpoint,
                  "Model evaluated by k_t/k_s sweeps (default: the initial model)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--iterations", opts.iterations, "Override the iteration count");
  return cmd;
}

int RunAblate(const GlobalOptions& g, const AblateOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  AxisOverrides(opts.axis, 0.0);  // Rejects an unknown axis before any work.
  const std::vector<double> grid = ParseDoubles(opts.grid, "--grid");
  if (grid.empty()) throw UsageError("--grid: empty list");

  std::vector<std::string> overrides = opts.overrides;
  if (opts.iterations >= 0) overrides.push_back("iterations=" + std::to_string(opts.iterations));
  if (g.seed_given) overrides.push_back("seed=" + std::to_string(g.seed));
  overrides.push_back("num_threads=" + std::to_string(g.deterministic ? 1 : g.threads));
  const TrainConfig base = ResolveTrainConfig(opts.preset, opts.config, overrides);
  const std::vector<std::uint64_t> seeds =
      opts.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : ParseSeeds(opts.seeds);
  const std::string dir = OutputDir(g);

  Json rows = Json::array();
  std::ostringstream csv;
  csv << opts.axis << ",runs,mean_ap,micro_ap\n";
  Json extra = Json::object();

  if (IsEvalOnly(opts.axis)) {
    const std::vector<Clip> heldout = SplitCorpus(GenerateCorpus([&] {
                                                    SyntheticConfig d = base.data;
                                                    d.seed = base.seed;
                                                    return d;
                                                  }()),
                                                  base)
                                          .heldout;
    Model model = InitialModel(base);
    if (!opts.checkpoint.empty()) {
      try {
        const Checkpoint ckpt = ReadCheckpoint(opts.checkpoint);
        model = ckpt.model;
        extra["checkpoint"] = opts.checkpoint;
        extra["checkpoint_config_matches"] = ckpt.config_hash == ConfigHash(base);
      } catch (const StructuralError& e) {
        throw UsageError(e.what());
      }
    }
    const std::vector<PatchEmbeddings> emb = EmbedAll(model, heldout);
    for (const double v : grid) {
      TrainConfig cfg;
      try {
        ConfigEntries entries;
        for (const std::string& o : AxisOverrides(opts.axis, v)) {
          for (const auto& e : ParseConfigText(o)) entries.push_back(e);
        }
        cfg = ApplyConfig(base, entries);
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
      const Matrix sim =
          BatchSimilarityMatrix(emb, cfg.aggregation, model.refiner, cfg.num_threads);
      const MetricReport m = MetricsFromSimilarity(sim, heldout);
      Json row{{"value", v}, {"runs", 1}, {"mean_ap", m.mean_ap}, {"micro_ap", m.micro_ap}};
      if (opts.axis == "k_t" && v == 1.0) {
        const Matrix pooled = MeanPoolingSimilarity(emb, cfg.aggregation, model.refiner);
        const bool same = pooled == sim;
        row["equals_mean_pooling"] = same;
        if (!same) {
          throw NumericFailure("k_t = 1 similarities differ from temporal mean pooling");
        }
      }
      rows.push_back(row);
      csv << FormatDouble(v) << ",1," << FormatDouble(m.mean_ap) << ','
          << FormatDouble(m.micro_ap) << '\n';
      std::cout << opts.axis << " = " << FormatDouble(v) << ": mAP " << FormatDouble(m.mean_ap)
                << " uAP " << FormatDouble(m.micro_ap) << "\n";
    }
  } else {
    for (const double v : grid) {
      std::vector<std::string> point = overrides;
      for (const std::string& o : AxisOverrides(opts.axis, v)) point.push_back(o);
      const TrainConfig cfg = ResolveTrainConfig(opts.preset, opts.config, point);
      std::vector<double> maps;
      std::vector<double> uaps;
      Json runs = Json::array();
      for (const std::uint64_t seed : seeds) {
        TrainConfig run = cfg;
        run.seed = seed;
        TrainResult r;
        try {
          r = Train(run);
        } catch (const TrainingDiverged& e) {
          throw NumericFailure(opts.axis + " = " + FormatDouble(v) + ", seed " +
                               std::to_string(seed) + ": " + e.what());
        }
        maps.push_back(r.final_metrics.mean_ap);
        uaps.push_back(r.final_metrics.micro_ap);
        runs.push_back({{"seed", seed},
                        {"mean_ap", r.final_metrics.mean_ap},
                        {"micro_ap", r.final_metrics.micro_ap}});
      }
      rows.push_back({{"value", v},
                      {"runs", seeds.size()},
                      {"mean_ap", Median(maps)},
                      {"micro_ap", Median(uaps)},
                      {"per_seed", runs}});
      csv << FormatDouble(v) << ',' << seeds.size() << ',' << FormatDouble(Median(maps)) << ','
          << FormatDouble(Median(uaps)) << '\n';
      std::cout << opts.axis << " = " << FormatDouble(v) << ": median mAP "
                << FormatDouble(Median(maps)) << " median uAP " << FormatDouble(Median(uaps))
                << "\n";
    }
  }

  Json report{{"command", "ablate"},
              {"stamp", Stamp()},
              {"axis", opts.axis},
              {"grid", grid},
              {"mode", IsEvalOnly(opts.axis) ? "evaluate" : "train"},
              {"seeds", seeds},
              {"deterministic", g.deterministic},
              {"config", ConfigJson(base)},
              {"rows", rows}};
  for (auto& [k, v] : extra.items()) report[k] = v;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string stem = "ablate_" + opts.axis;
  RecordTiming(g, dir, stem, seconds, report);
  WriteText(JoinPath(dir, stem + ".csv"), csv.str());
  WriteText(JoinPath(dir, stem + ".json"), report.dump(2) + "\n");
  std::cout << "wrote " << JoinPath(dir, stem + ".json") << "\n";
  return kExitOk;
}

}  // namespace aprank::cli
