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

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "aprank/autodiff.h"
#include "aprank/base_losses.h"
#include "aprank/graph_ops.h"

namespace aprank {
namespace {

namespace ad = autodiff;

// Decorrelates the streams derived from one user seed.
std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSampleStream = 2;

bool AllFinite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double v) { return std::isfinite(v); });
}

struct RefinerVars {
  ad::Var a;  // scale or kernel
  ad::Var b;  // bias
};

ad::Var ApplyRefiner(ad::Graph& g, ad::Var m, const RefinerParams& r,
                     const RefinerVars& vars) {
  switch (r.kind) {
    case RefinerKind::kIdentity:
      return m;
    case RefinerKind::kAffine: {
      ad::Var out = ad::AffineClamp(g, m, vars.a, vars.b);
      return r.downsample == 1 ? out : ad::BlockAverage(g, out, r.downsample);
    }
    case RefinerKind::kConv: {
      ad::Var out = ad::Tanh(g, ad::Conv2dSame(g, m, vars.a, vars.b));
      return r.downsample == 1 ? out : ad::BlockAverage(g, out, r.downsample);
    }
  }
  return m;
}

struct VideoObjective {
  QueryLoss loss;
  std::vector<double> kinks;
};

VideoObjective MakeVideoObjective(const TrainConfig& cfg) {
  switch (cfg.video_loss) {
    case VideoLoss::kQuadLinear: {
      const QuadLinearParams p = cfg.video;
      return {[p](const QueryContext& q) { return QuadLinearApRisk(q, p); },
              {-p.delta, 0.0}};
    }
    case VideoLoss::kSmoothAp: {
      const SmoothApParams p{cfg.smooth_tau};
      return {[p](const QueryContext& q) { return SmoothApRisk(q, p); }, {}};
    }
    case VideoLoss::kTriplet: {
      const double m = cfg.margin;
      return {[m](const QueryContext& q) { return TripletLoss(q, m); }, {-m}};
    }
    case VideoLoss::kContrastive: {
      const double m = cfg.margin;
      return {[m](const QueryContext& q) { return ContrastiveLoss(q, m); }, {}};
    }
    case VideoLoss::kNone:
      break;
  }
  return {};
}

std::vector<int> Groups(const std::vector<Clip>& clips) {
  std::vector<int> ids;
  ids.reserve(clips.size());
  for (const Clip& c : clips) ids.push_back(c.group);
  return ids;
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace

const char* VideoLossName(VideoLoss loss) {
  switch (loss) {
    case VideoLoss::kQuadLinear:
      return "quadlinear";
    case VideoLoss::kSmoothAp:
      return "smooth";
    case VideoLoss::kTriplet:
      return "triplet";
    case VideoLoss::kContrastive:
      return "contrastive";
    case VideoLoss::kNone:
      return "none";
  }
  return "unknown";
}

std::optional<VideoLoss> ParseVideoLoss(std::string_view name) {
  for (const VideoLoss l : {VideoLoss::kQuadLinear, VideoLoss::kSmoothAp,
                            VideoLoss::kTriplet, VideoLoss::kContrastive,
                            VideoLoss::kNone}) {
    if (name == VideoLossName(l)) return l;
  }
  return std::nullopt;
}

void LossWeights::Validate() const {
  Require(lambda_v >= 0.0 && std::isfinite(lambda_v), "lambda_v must be >= 0");
  Require(lambda_f >= 0.0 && std::isfinite(lambda_f), "lambda_f must be >= 0");
  Require(lambda_s >= 0.0 && std::isfinite(lambda_s), "lambda_s must be >= 0");
  Require(tau_nce > 0.0 && std::isfinite(tau_nce), "tau_nce must be > 0");
}

void TrainConfig::Validate() const {
  SyntheticConfig d = data;
  d.seed = seed;
  d.Validate();
  Require(batch_size >= 4 && batch_size % 2 == 0,
          "batch_size must be even and >= 4");
  Require(holdout_fraction > 0.0 && holdout_fraction < 1.0,
          "holdout_fraction must lie in (0, 1)");
  video.Validate();
  frame.Validate();
  Require(smooth_tau > 0.0, "smooth_tau must be > 0");
  Require(margin >= 0.0 && std::isfinite(margin), "margin must be >= 0");
  rates.Validate();
  aggregation.Validate();
  refiner.Validate();
  weights.Validate();
  optimizer.Validate();
  Require(init_noise >= 0.0 && std::isfinite(init_noise),
          "init_noise must be >= 0");
  Require(num_threads >= 1, "num_threads must be >= 1");
  const std::size_t heldout = static_cast<std::size_t>(
      std::llround(holdout_fraction * static_cast<double>(data.num_groups)));
  Require(heldout >= 1 && heldout < data.num_groups,
          "holdout_fraction must leave at least one group on each side");
  Require(data.num_clips >= 2 * data.num_groups,
          "every group needs at least two clips");
  Require(data.num_groups - heldout >= batch_size / 2,
          "batch_size / 2 exceeds the number of training groups");
}

std::optional<TrainConfig> Preset(std::string_view name) {
  TrainConfig cfg;
  cfg.data.augment.dropout = 0.1;
  cfg.data.augment.noise = 0.05;
  cfg.data.distractor_pool = 24;
  cfg.data.distractor_rate = 0.5;
  if (name == "easy") {
    cfg.data.noise = 0.05;
    cfg.data.overlap = 0.8;
    cfg.iterations = 2000;
    return cfg;
  }
  if (name == "hard") {
    cfg.data.noise = 0.3;
    cfg.data.overlap = 0.3;
    cfg.iterations = 2000;
    return cfg;
  }
  return std::nullopt;
}

std::vector<Matrix> Model::Parameters() const {
  std::vector<Matrix> out{w};
  switch (refiner.kind) {
    case RefinerKind::kIdentity:
      break;
    case RefinerKind::kAffine:
      out.emplace_back(1, 1, refiner.scale);
      out.emplace_back(1, 1, refiner.bias);
      break;
    case RefinerKind::kConv:
      out.emplace_back(refiner.conv_size, refiner.conv_size, refiner.conv_weights);
      out.emplace_back(1, 1, refiner.bias);
      break;
  }
  return out;
}

void Model::SetParameters(const std::vector<Matrix>& params) {
  const std::size_t expected = refiner.kind == RefinerKind::kIdentity ? 1 : 3;
  if (params.size() != expected) {
    throw StructuralError("Model::SetParameters: expected " +
                          std::to_string(expected) + " tensors, got " +
                          std::to_string(params.size()));
  }
  if (params[0].rows() != w.rows() || params[0].cols() != w.cols()) {
    throw StructuralError("Model::SetParameters: W shape changed");
  }
  w = params[0];
  if (refiner.kind == RefinerKind::kAffine) {
    refiner.scale = params[1](0, 0);
    refiner.bias = params[2](0, 0);
  } else if (refiner.kind == RefinerKind::kConv) {
    refiner.conv_weights = params[1].data();
    refiner.bias = params[2](0, 0);
  }
}

Model InitialModel(const TrainConfig& cfg) {
  const std::size_t d = cfg.data.dim;
  Model model{Matrix(d, d), cfg.refiner};
  std::mt19937_64 rng(SplitMix(cfg.seed ^ SplitMix(kInitStream)));
  std::normal_distribution<double> noise(0.0, cfg.init_noise);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      model.w(r, c) = (r == c ? 1.0 : 0.0) + (cfg.init_noise > 0.0 ? noise(rng) : 0.0);
    }
  }
  return model;
}

PatchEmbeddings Embed(const Model& model, const PatchEmbeddings& clip) {
  const std::size_t d = clip.dim();
  if (model.w.rows() != d || model.w.cols() != d) {
    throw StructuralError("Embed: W is " + std::to_string(model.w.rows()) + "x" +
                          std::to_string(model.w.cols()) + " but patches have dim " +
                          std::to_string(d));
  }
  PatchEmbeddings out(clip.frames(), clip.patches(), d);
  for (std::size_t t = 0; t < clip.frames(); ++t) {
    for (std::size_t r = 0; r < clip.patches(); ++r) {
      const auto x = clip.patch(t, r);
      auto y = out.patch(t, r);
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += model.w(i, k) * x[k];
        y[i] = acc;
      }
    }
  }
  return out;
}

BatchEvaluation EvaluateBatch(const Model& model, const std::vector<Clip>& batch,
                              const TrainConfig& cfg, bool compute_grads,
                              bool log_decisions) {
  if (batch.size() < 2) throw StructuralError("EvaluateBatch: need >= 2 clips");
  ad::Graph g;
  g.set_log_decisions(log_decisions);
  const ad::Var w = g.Parameter(model.w, "w");
  RefinerVars rv{};
  if (model.refiner.kind == RefinerKind::kAffine) {
    rv.a = g.Parameter(Matrix(1, 1, model.refiner.scale), "scale");
    rv.b = g.Parameter(Matrix(1, 1, model.refiner.bias), "bias");
  } else if (model.refiner.kind == RefinerKind::kConv) {
    rv.a = g.Parameter(Matrix(model.refiner.conv_size, model.refiner.conv_size,
                              model.refiner.conv_weights),
                       "kernel");
    rv.b = g.Parameter(Matrix(1, 1, model.refiner.bias), "bias");
  }

  const std::size_t n = batch.size();
  const std::vector<int> groups = Groups(batch);
  const RelevanceMatrix y = RelevanceMatrix::FromGroups(groups);

  std::vector<ad::Var> emb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PatchEmbeddings& p = batch[i].student;
    const ad::Var x = g.Constant(Matrix(p.frames() * p.patches(), p.dim(), p.data()));
    emb[i] = ad::NormalizeRows(g, ad::MatMulBT(g, x, w));
  }

  const QuadLinearParams fp = cfg.frame;
  const QueryLoss frame_loss = [fp](const QueryContext& q) {
    return QuadLinearApRisk(q, fp);
  };
  const std::vector<double> frame_kinks{-fp.delta, 0.0};

  std::vector<ad::Var> cells(n * n);
  std::vector<ad::Var> frame_terms;
  for (std::size_t i = 0; i < n; ++i) {
    const PatchEmbeddings& a = batch[i].student;
    for (std::size_t j = 0; j < n; ++j) {
      const PatchEmbeddings& b = batch[j].student;
      const ad::Var patch_sim = ad::MatMulBT(g, emb[i], emb[j]);
      const ad::Var m = ad::SpatialTopKChamfer(
          g, patch_sim, a.frames(), a.patches(), b.frames(), b.patches(),
          TopKCount(cfg.aggregation.k_s, b.patches()));
      if (i != j && y.relevant(i, j)) {
        const Matrix teacher =
            TeacherFrameSimilarity(batch[i].teacher, batch[j].teacher);
        const PseudoLabelMatrix labels = GeneratePseudoLabels(teacher, cfg.rates);
        frame_terms.push_back(
            ad::FrameRankingLoss(g, m, labels, frame_loss, frame_kinks));
      }
      const ad::Var refined = ApplyRefiner(g, m, model.refiner, rv);
      cells[i * n + j] = ad::TemporalTopKChamfer(
          g, refined, TopKCount(cfg.aggregation.k_t, g.Value(refined).cols()));
    }
  }
  const ad::Var sim = ad::Assemble(g, cells, n, n);

  std::vector<ad::Var> terms;
  std::vector<double> weights;
  BatchEvaluation out;
  if (cfg.video_loss != VideoLoss::kNone) {
    const VideoObjective obj = MakeVideoObjective(cfg);
    const ad::Var v = ad::BatchRankingLoss(g, sim, y, obj.loss,
                                           ad::OpKind::kPiecewiseMap, obj.kinks);
    out.loss.video = g.Value(v)(0, 0);
    terms.push_back(v);
    weights.push_back(cfg.weights.lambda_v);
  }
  if (!frame_terms.empty()) {
    const std::vector<double> avg(frame_terms.size(),
                                  1.0 / static_cast<double>(frame_terms.size()));
    const ad::Var f = ad::WeightedSum(g, frame_terms, avg);
    out.loss.frame = g.Value(f)(0, 0);
    terms.push_back(f);
    weights.push_back(cfg.weights.lambda_f);
  }
  const double tau = cfg.weights.tau_nce;
  const ad::Var nce = ad::BatchRankingLoss(
      g, sim, y, [tau](const QueryContext& q) { return InfoNceLoss(q, tau); },
      ad::OpKind::kLogSumExp, {});
  const ad::Var sshn = ad::BatchSshn(g, sim, y);
  out.loss.nce = g.Value(nce)(0, 0);
  out.loss.sshn = g.Value(sshn)(0, 0);
  terms.push_back(nce);
  weights.push_back(1.0);
  terms.push_back(sshn);
  weights.push_back(cfg.weights.lambda_s);
  const ad::Var total = ad::WeightedSum(g, terms, weights);
  out.loss.total = g.Value(total)(0, 0);
  out.similarity = g.Value(sim);

  if (compute_grads) {
    g.Backward(total);
    out.grads.push_back(g.Grad(w));
    if (model.refiner.kind != RefinerKind::kIdentity) {
      out.grads.push_back(g.Grad(rv.a));
      out.grads.push_back(g.Grad(rv.b));
    }
  }
  out.decisions = g.decisions();
  return out;
}

MetricReport EvaluateRetrieval(const Model& model, const std::vector<Clip>& clips,
                               const TrainConfig& cfg) {
  if (clips.size() < 2) throw StructuralError("EvaluateRetrieval: need >= 2 clips");
  std::vector<PatchEmbeddings> embedded;
  embedded.reserve(clips.size());
  for (const Clip& c : clips) embedded.push_back(Embed(model, c.student));
  const Matrix sim = BatchSimilarityMatrix(embedded, cfg.aggregation,
                                           model.refiner, cfg.num_threads);
  std::vector<ScoredList> queries(clips.size());
  for (std::size_t k = 0; k < clips.size(); ++k) {
    for (std::size_t j = 0; j < clips.size(); ++j) {
      if (j == k) continue;
      queries[k].scores.push_back(sim(k, j));
      queries[k].labels.push_back(clips[j].group == clips[k].group ? 1 : 0);
    }
  }
  return EvaluateQueries(queries);
}

CorpusSplit SplitCorpus(const std::vector<Clip>& corpus, const TrainConfig& cfg) {
  const std::size_t groups = cfg.data.num_groups;
  const std::size_t heldout = static_cast<std::size_t>(
      std::llround(cfg.holdout_fraction * static_cast<double>(groups)));
  const int first_heldout = static_cast<int>(groups - heldout);
  CorpusSplit split;
  for (const Clip& c : corpus) {
    (c.group >= first_heldout ? split.heldout : split.train).push_back(c);
  }
  return split;
}

TrainResult Train(const TrainConfig& cfg) {
  cfg.Validate();
  TrainConfig c = cfg;
  c.data.seed = cfg.seed;
  const std::vector<Clip> corpus = GenerateCorpus(c.data);
  const CorpusSplit split = SplitCorpus(corpus, c);

  std::vector<std::vector<std::size_t>> by_group;
  {
    std::vector<int> ids = Groups(split.train);
    const int max_id = *std::max_element(ids.begin(), ids.end());
    by_group.resize(static_cast<std::size_t>(max_id) + 1);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      by_group[static_cast<std::size_t>(ids[k])].push_back(k);
    }
  }
  std::vector<std::size_t> group_order(by_group.size());
  std::iota(group_order.begin(), group_order.end(), 0);

  TrainResult result;
  Model model = InitialModel(c);
  result.initial = model;
  AdamW optimizer(c.optimizer, c.iterations);
  std::mt19937_64 rng(SplitMix(c.seed ^ SplitMix(kSampleStream)));
  const bool augment = c.data.augment.Any();

  const MetricReport initial = EvaluateRetrieval(model, split.heldout, c);
  result.evals.push_back({0, initial.mean_ap, initial.micro_ap});

  std::vector<Clip> batch;
  for (std::size_t it = 0; it < c.iterations; ++it) {
    batch.clear();
    std::shuffle(group_order.begin(), group_order.end(), rng);
    for (std::size_t gi = 0; gi < c.batch_size / 2; ++gi) {
      const std::vector<std::size_t>& members = by_group[group_order[gi]];
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      const std::size_t first = pick(rng);
      std::size_t second = pick(rng);
      while (second == first) second = pick(rng);
      for (const std::size_t k : {first, second}) {
        const Clip& clip = split.train[members[k]];
        if (augment) {
          batch.push_back(Augment(clip, c.data.augment, rng()).clip);
        } else {
          batch.push_back(clip);
        }
      }
    }
    BatchEvaluation eval;
    try {
      eval = EvaluateBatch(model, batch, c, true);
    } catch (const DegenerateInputError& e) {
      // Non-finite or collapsed embeddings surface here first.
      throw TrainingDiverged(std::string(e.what()) + " at iteration " + std::to_string(it),
                             it, LossBreakdown{}, model);
    }
    bool finite = std::isfinite(eval.loss.total);
    for (const Matrix& gr : eval.grads) finite = finite && AllFinite(gr);
    if (!finite) {
      throw TrainingDiverged("non-finite loss or gradient at iteration " +
                                 std::to_string(it),
                             it, eval.loss, model);
    }
    result.history.push_back({it, optimizer.LearningRate(it), eval.loss});
    std::vector<Matrix> params = model.Parameters();
    optimizer.Step(params, eval.grads);
    for (const Matrix& p : params) {
      if (!AllFinite(p)) {
        throw TrainingDiverged("non-finite parameter after update " + std::to_string(it),
                               it, eval.loss, model);
      }
    }
    model.SetParameters(params);
    const std::size_t done = it + 1;
    if (c.eval_every > 0 && done % c.eval_every == 0 && done != c.iterations) {
      const MetricReport r = EvaluateRetrieval(model, split.heldout, c);
      result.evals.push_back({done, r.mean_ap, r.micro_ap});
    }
  }
  result.final_metrics =
      c.iterations == 0 ? initial : EvaluateRetrieval(model, split.heldout, c);
  if (c.iterations > 0) {
    result.evals.push_back(
        {c.iterations, result.final_metrics.mean_ap, result.final_metrics.micro_ap});
  }
  result.model = std::move(model);
  return result;
}

}  // namespace aprank
