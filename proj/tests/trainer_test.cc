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

#include "aprank/trainer.h"

#include <cmath>
#include <ostream>

#include <gtest/gtest.h>

#include "aprank/errors.h"
#include "test_util.h"

namespace aprank {
namespace {

using ::aprank::testing::RelativeError;

TrainConfig TinyConfig() {
  TrainConfig c;
  c.data.num_clips = 20;
  c.data.num_groups = 10;
  c.data.frames = 6;
  c.data.patches = 3;
  c.data.dim = 6;
  c.data.teacher_dim = 4;
  c.batch_size = 4;
  c.iterations = 6;
  c.optimizer.learning_rate = 1e-2;
  return c;
}

// Groups 0, 0, 1, 1, 2, 2 from a corpus with round-robin group ids.
std::vector<Clip> SixClipBatch(const TrainConfig& cfg) {
  SyntheticConfig d = cfg.data;
  d.seed = cfg.seed;
  const std::vector<Clip> corpus = GenerateCorpus(d);
  const std::size_t g = d.num_groups;
  return {corpus[0], corpus[g], corpus[1], corpus[g + 1], corpus[2], corpus[g + 2]};
}

struct PipelineCase {
  const char* name;
  RefinerParams refiner;
  VideoLoss loss;
};

void PrintTo(const PipelineCase& c, std::ostream* os) { *os << c.name; }

RefinerParams Affine() {
  RefinerParams r;
  r.kind = RefinerKind::kAffine;
  r.scale = 1.3;
  r.bias = -0.05;
  return r;
}

RefinerParams Conv() {
  RefinerParams r = RefinerParams::DeltaConv(3);
  r.conv_weights = {0.05, -0.1, 0.02, 0.1, 0.9, 0.1, -0.03, 0.08, 0.04};
  r.bias = 0.02;
  return r;
}

class PipelineGradientTest : public ::testing::TestWithParam<PipelineCase> {};

// Central differences of the whole batch loss against every trainable entry.
// Perturbations that change a top-K set, a clamp or a piecewise branch are
// skipped; the rest must agree to within 1e-5 relative.
TEST_P(PipelineGradientTest, MatchesFiniteDifferences) {
  TrainConfig cfg = TinyConfig();
  cfg.aggregation = {0.67, 0.5};  // K = 2 patches and 3 frames.
  cfg.video_loss = GetParam().loss;
  cfg.init_noise = 0.2;
  cfg.refiner = GetParam().refiner;
  const Model model = InitialModel(cfg);
  const std::vector<Clip> batch = SixClipBatch(cfg);
  const BatchEvaluation base = EvaluateBatch(model, batch, cfg, true, true);

  const double h = 1e-6;
  const std::vector<Matrix> params = model.Parameters();
  ASSERT_EQ(base.grads.size(), params.size());
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t k = 0; k < params[t].size(); ++k) {
      std::vector<Matrix> plus = params;
      std::vector<Matrix> minus = params;
      plus[t].data()[k] += h;
      minus[t].data()[k] -= h;
      Model mp = model;
      Model mm = model;
      mp.SetParameters(plus);
      mm.SetParameters(minus);
      const BatchEvaluation ep = EvaluateBatch(mp, batch, cfg, false, true);
      const BatchEvaluation em = EvaluateBatch(mm, batch, cfg, false, true);
      if (ep.decisions != base.decisions || em.decisions != base.decisions) {
        ++skipped;
        continue;
      }
      const double numeric = (ep.loss.total - em.loss.total) / (2.0 * h);
      worst = std::max(worst, RelativeError(base.grads[t].data()[k], numeric, 1e-6));
      ++checked;
    }
  }
  EXPECT_GT(checked, 3 * skipped) << "too few smooth directions";
  EXPECT_LT(worst, 1e-5) << checked << " checked, " << skipped << " skipped";
}

INSTANTIATE_TEST_SUITE_P(
    Refiners, PipelineGradientTest,
    ::testing::Values(PipelineCase{"identity_quadlinear", RefinerParams{}, VideoLoss::kQuadLinear},
                      PipelineCase{"affine_quadlinear", Affine(), VideoLoss::kQuadLinear},
                      PipelineCase{"conv_quadlinear", Conv(), VideoLoss::kQuadLinear},
                      PipelineCase{"identity_smooth", RefinerParams{}, VideoLoss::kSmoothAp},
                      PipelineCase{"identity_triplet", RefinerParams{}, VideoLoss::kTriplet}),
    [](const ::testing::TestParamInfo<PipelineCase>& info) { return info.param.name; });

TEST(EvaluateBatchTest, TotalIsWeightedSumOfTerms) {
  TrainConfig cfg = TinyConfig();
  const Model model = InitialModel(cfg);
  const std::vector<Clip> batch = SixClipBatch(cfg);
  const LossBreakdown l = EvaluateBatch(model, batch, cfg, false).loss;
  const LossWeights& w = cfg.weights;
  EXPECT_NEAR(l.total, w.lambda_v * l.video + w.lambda_f * l.frame + l.nce + w.lambda_s * l.sshn,
              1e-12);
  EXPECT_GT(l.frame, 0.0);
  EXPECT_GT(l.nce, 0.0);

  TrainConfig base = cfg;
  base.weights.lambda_v = 0.0;
  base.weights.lambda_f = 0.0;
  const LossBreakdown b = EvaluateBatch(model, batch, base, false).loss;
  EXPECT_EQ(b.total, b.nce + base.weights.lambda_s * b.sshn);
  EXPECT_EQ(b.nce, l.nce);
  EXPECT_EQ(b.sshn, l.sshn);

  TrainConfig none = cfg;
  none.video_loss = VideoLoss::kNone;
  EXPECT_EQ(EvaluateBatch(model, batch, none, false).loss.video, 0.0);
}

TEST(EvaluateBatchTest, SeparatedBatchHasNoVideoGradient) {
  // Identical clips within a group and near-orthogonal content across groups:
  // every negative sits more than delta below every positive, so the video
  // term is zero and contributes nothing to the gradient.
  TrainConfig cfg = TinyConfig();
  cfg.data.noise = 0.0;
  cfg.data.overlap = 1.0;
  cfg.data.nuisance = 0.0;
  cfg.data.dim = 24;
  cfg.init_noise = 0.0;
  const Model model = InitialModel(cfg);
  const std::vector<Clip> batch = SixClipBatch(cfg);
  const BatchEvaluation with = EvaluateBatch(model, batch, cfg, true);
  ASSERT_EQ(with.loss.video, 0.0);
  TrainConfig off = cfg;
  off.weights.lambda_v = 0.0;
  const BatchEvaluation without = EvaluateBatch(model, batch, off, true);
  EXPECT_EQ(with.grads, without.grads);
}

TEST(EvaluateBatchTest, Errors) {
  const TrainConfig cfg = TinyConfig();
  const Model model = InitialModel(cfg);
  const std::vector<Clip> one{SixClipBatch(cfg)[0]};
  EXPECT_THROW(EvaluateBatch(model, one, cfg, false), StructuralError);
  Model wrong = model;
  wrong.w = Matrix(3, 3);
  EXPECT_THROW(Embed(wrong, one[0].student), StructuralError);
}

TEST(TrainTest, ZeroIterationsReturnsInitialModel) {
  TrainConfig cfg = TinyConfig();
  cfg.iterations = 0;
  const TrainResult r = Train(cfg);
  EXPECT_EQ(r.model, InitialModel(cfg));
  EXPECT_TRUE(r.history.empty());
  ASSERT_EQ(r.evals.size(), 1u);
  EXPECT_EQ(r.evals[0].mean_ap, r.final_metrics.mean_ap);
}

TEST(TrainTest, SameSeedSameParameters) {
  TrainConfig cfg = TinyConfig();
  cfg.data.augment.dropout = 0.2;
  cfg.data.augment.noise = 0.05;
  const TrainResult a = Train(cfg);
  const TrainResult b = Train(cfg);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.history.size(), 6u);
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    EXPECT_EQ(a.history[k].loss.total, b.history[k].loss.total);
  }
  EXPECT_NE(a.model, a.initial);
  TrainConfig other = cfg;
  other.seed = 2;
  EXPECT_NE(Train(other).model, a.model);
  TrainConfig threads = cfg;
  threads.num_threads = 3;
  EXPECT_EQ(Train(threads).final_metrics.mean_ap, a.final_metrics.mean_ap);
}

TEST(TrainTest, PeriodicEvaluations) {
  TrainConfig cfg = TinyConfig();
  cfg.eval_every = 2;
  const TrainResult r = Train(cfg);
  ASSERT_EQ(r.evals.size(), 4u);
  EXPECT_EQ(r.evals[1].iteration, 2u);
  EXPECT_EQ(r.evals[3].iteration, 6u);
}

TEST(TrainTest, RunawayLearningRateDiverges) {
  TrainConfig cfg = TinyConfig();
  cfg.optimizer.learning_rate = 1e200;
  try {
    Train(cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_LT(e.iteration(), cfg.iterations);
    for (const Matrix& p : e.model().Parameters()) {
      for (const double v : p.data()) EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c = TinyConfig();
  c.batch_size = 5;
  EXPECT_THROW(c.Validate(), ParameterError);
  c = TinyConfig();
  c.batch_size = 18;
  EXPECT_THROW(c.Validate(), ParameterError);
  c = TinyConfig();
  c.weights.tau_nce = 0.0;
  EXPECT_THROW(c.Validate(), ParameterError);
  c = TinyConfig();
  c.data.num_clips = 15;
  EXPECT_THROW(c.Validate(), ParameterError);
  c = TinyConfig();
  c.holdout_fraction = 0.01;
  EXPECT_THROW(c.Validate(), ParameterError);
  EXPECT_NO_THROW(TinyConfig().Validate());
}

TEST(PresetTest, KnownNames) {
  for (const char* name : {"easy", "hard"}) {
    const std::optional<TrainConfig> p = Preset(name);
    ASSERT_TRUE(p.has_value()) << name;
    EXPECT_NO_THROW(p->Validate());
  }
  EXPECT_LT(Preset("easy")->data.noise, Preset("hard")->data.noise);
  EXPECT_GT(Preset("easy")->data.overlap, Preset("hard")->data.overlap);
  EXPECT_FALSE(Preset("medium").has_value());
}

TEST(VideoLossTest, NamesRoundTrip) {
  for (const VideoLoss l : {VideoLoss::kQuadLinear, VideoLoss::kSmoothAp, VideoLoss::kTriplet,
                            VideoLoss::kContrastive, VideoLoss::kNone}) {
    EXPECT_EQ(ParseVideoLoss(VideoLossName(l)), l);
  }
  EXPECT_FALSE(ParseVideoLoss("ranknet").has_value());
}

TEST(SplitCorpusTest, HoldsOutLastGroups) {
  const TrainConfig cfg = TinyConfig();
  SyntheticConfig d = cfg.data;
  const CorpusSplit s = SplitCorpus(GenerateCorpus(d), cfg);
  EXPECT_EQ(s.heldout.size(), 4u);
  EXPECT_EQ(s.train.size(), 16u);
  for (const Clip& c : s.heldout) EXPECT_GE(c.group, 8);
}

}  // namespace
}  // namespace aprank
