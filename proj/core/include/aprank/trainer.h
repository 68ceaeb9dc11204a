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

// Synthetic training loop: sample a batch of relevant clip pairs, embed it
// with the student map, label frame pairs from the teacher view, build the
// hierarchical loss on an autodiff graph and update with AdamW.

#ifndef APRANK_TRAINER_H_
#define APRANK_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aprank/errors.h"
#include "aprank/matrix.h"
#include "aprank/metrics.h"
#include "aprank/optimizer.h"
#include "aprank/pseudo_labels.h"
#include "aprank/ranking_core.h"
#include "aprank/similarity.h"
#include "aprank/surrogate_losses.h"
#include "aprank/synthetic.h"

namespace aprank {

// Objective used for the video-level term. kNone drops the term.
enum class VideoLoss { kQuadLinear, kSmoothAp, kTriplet, kContrastive, kNone };

const char* VideoLossName(VideoLoss loss);
std::optional<VideoLoss> ParseVideoLoss(std::string_view name);

struct LossWeights {
  double lambda_v = 4.0;
  double lambda_f = 6.0;
  double lambda_s = 1.0;
  double tau_nce = 0.07;

  void Validate() const;
};

struct TrainConfig {
  SyntheticConfig data;
  std::size_t iterations = 2000;
  std::size_t batch_size = 16;  // Even; batch_size / 2 groups of two clips.
  double holdout_fraction = 0.2;
  std::size_t eval_every = 0;  // 0: evaluate only before and after training.

  VideoLoss video_loss = VideoLoss::kQuadLinear;
  QuadLinearParams video{0.05, 0.10};
  QuadLinearParams frame{0.05, 5.00};
  double smooth_tau = 0.01;
  double margin = 0.2;  // Triplet and contrastive.
  LabelRates rates{0.35, 0.35};
  AggregationParams aggregation{0.10, 0.03};
  RefinerParams refiner;  // Initial refiner; its kind fixes the trainable set.
  LossWeights weights;
  OptimizerConfig optimizer;
  double init_noise = 0.01;  // W starts at identity plus N(0, init_noise^2).

  // Drives the corpus (overriding data.seed), initialization, batch sampling
  // and augmentation.
  std::uint64_t seed = 1;
  std::size_t num_threads = 1;  // Evaluation workers; results do not depend on it.

  // Throws ParameterError naming the offending field.
  void Validate() const;
};

// Named starting points: "easy" (low noise, long overlap) and "hard" (noisy,
// short overlap). Returns nullopt for an unknown name.
std::optional<TrainConfig> Preset(std::string_view name);

struct Model {
  Matrix w;  // D x D, applied to every patch as x -> W x.
  RefinerParams refiner;

  // Trainable tensors in a fixed order: W, then scale and bias (affine) or
  // kernel and bias (conv). The identity refiner adds nothing.
  std::vector<Matrix> Parameters() const;
  void SetParameters(const std::vector<Matrix>& params);

  bool operator==(const Model&) const = default;
};

Model InitialModel(const TrainConfig& cfg);

// Every patch of `clip` mapped through W.
PatchEmbeddings Embed(const Model& model, const PatchEmbeddings& clip);

struct LossBreakdown {
  double total = 0.0;
  double video = 0.0;
  double frame = 0.0;
  double nce = 0.0;
  double sshn = 0.0;
};

struct BatchEvaluation {
  LossBreakdown loss;
  Matrix similarity;           // N x N video similarities.
  std::vector<Matrix> grads;   // Conformal to Model::Parameters().
  std::vector<std::uint64_t> decisions;
};

// Forward (and optionally backward) pass of the total loss on one batch.
// Relevance is by group id; frame-level terms use relevant pairs i != j only
// and are averaged per pair, then over pairs.
BatchEvaluation EvaluateBatch(const Model& model,
                              const std::vector<Clip>& batch,
                              const TrainConfig& cfg, bool compute_grads,
                              bool log_decisions = false);

// Each clip queries all others; relevant means same group.
MetricReport EvaluateRetrieval(const Model& model,
                               const std::vector<Clip>& clips,
                               const TrainConfig& cfg);

struct IterationRecord {
  std::size_t iteration = 0;
  double learning_rate = 0.0;
  LossBreakdown loss;
};

struct EvalRecord {
  std::size_t iteration = 0;  // Updates applied before the evaluation.
  double mean_ap = 0.0;
  double micro_ap = 0.0;
};

struct TrainResult {
  Model initial;
  Model model;
  std::vector<IterationRecord> history;
  std::vector<EvalRecord> evals;
  MetricReport final_metrics;
};

// Raised when the loss or a gradient stops being finite. Carries the state
// at the failing iteration.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, std::size_t iteration,
                   LossBreakdown loss, Model model)
      : NumericError(what),
        iteration_(iteration),
        loss_(loss),
        model_(std::move(model)) {}
  std::size_t iteration() const { return iteration_; }
  const LossBreakdown& loss() const { return loss_; }
  const Model& model() const { return model_; }

 private:
  std::size_t iteration_;
  LossBreakdown loss_;
  Model model_;
};

// Splits the corpus by group: the last round(holdout_fraction * groups)
// groups are held out for evaluation.
struct CorpusSplit {
  std::vector<Clip> train;
  std::vector<Clip> heldout;
};
CorpusSplit SplitCorpus(const std::vector<Clip>& corpus, const TrainConfig& cfg);

TrainResult Train(const TrainConfig& cfg);

}  // namespace aprank

#endif  // APRANK_TRAINER_H_
