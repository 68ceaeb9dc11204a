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

#include "aprank/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "aprank/errors.h"

namespace aprank {
namespace {

using Rng = std::mt19937_64;

std::vector<double> Gaussian(Rng& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

double Norm(const std::vector<double>& v) {
  double sq = 0.0;
  for (const double x : v) sq += x * x;
  return std::sqrt(sq);
}

// Random orthogonal matrix from Gram-Schmidt on Gaussian columns.
Matrix RandomRotation(Rng& rng, std::size_t d) {
  Matrix q(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> v;
    double n = 0.0;
    while (n < 1e-6) {
      v = Gaussian(rng, d, 1.0);
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t r = 0; r < d; ++r) dot += v[r] * q(r, p);
        for (std::size_t r = 0; r < d; ++r) v[r] -= dot * q(r, p);
      }
      n = Norm(v);
    }
    for (std::size_t r = 0; r < d; ++r) q(r, c) = v[r] / n;
  }
  return q;
}

void CheckFraction(double v, const char* name, bool allow_zero) {
  if (!std::isfinite(v) || v > 1.0 || v < 0.0 || (!allow_zero && v == 0.0)) {
    throw ParameterError(std::string(name) + " must lie in " +
                         (allow_zero ? "[0, 1]" : "(0, 1]") + ", got " +
                         std::to_string(v));
  }
}

std::size_t RoundCount(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

}  // namespace

void AugmentToggles::Validate() const {
  CheckFraction(crop_keep, "crop_keep", /*allow_zero=*/false);
  CheckFraction(dropout, "dropout", /*allow_zero=*/true);
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw ParameterError("augmentation noise must be >= 0");
  }
}

bool AugmentToggles::Any() const {
  return crop_keep < 1.0 || reverse || shuffle || dropout > 0.0 || noise > 0.0;
}

void SyntheticConfig::Validate() const {
  if (num_clips == 0 || frames == 0 || patches == 0 || teacher_dim == 0) {
    throw ParameterError("synthetic sizes must be positive");
  }
  if (dim < 2) throw ParameterError("synthetic dim must be >= 2");
  if (num_styles == 0) throw ParameterError("num_styles must be >= 1");
  if (num_groups == 0 || num_groups > num_clips) {
    throw ParameterError("num_groups must lie in [1, num_clips]");
  }
  CheckFraction(overlap, "overlap", /*allow_zero=*/false);
  CheckFraction(distractor_rate, "distractor_rate", /*allow_zero=*/true);
  if (distractor_rate > 0.0 && distractor_pool == 0) {
    throw ParameterError("distractor_rate > 0 needs a non-empty distractor_pool");
  }
  if (!(noise >= 0.0) || !(nuisance >= 0.0) || !(teacher_noise >= 0.0)) {
    throw ParameterError("noise levels must be >= 0");
  }
  augment.Validate();
}

std::vector<Clip> GenerateCorpus(const SyntheticConfig& cfg) {
  cfg.Validate();
  Rng rng(cfg.seed);
  const std::size_t d = cfg.dim;
  const std::size_t dc = d / 2;
  const std::size_t dn = d - dc;
  const Matrix rotation = RandomRotation(rng, d);
  const std::vector<double> projection =
      Gaussian(rng, cfg.teacher_dim * dc, 1.0 / std::sqrt(double(dc)));
  const std::size_t planted_len =
      std::max<std::size_t>(1, RoundCount(cfg.overlap, cfg.frames));
  const std::size_t patch_block = cfg.patches * dc;

  // Latent content is unit scale per patch; one run of planted frames per
  // group.
  const double content_sd = 1.0 / std::sqrt(double(dc));
  std::vector<std::vector<double>> group_latent(cfg.num_groups);
  for (auto& g : group_latent) g = Gaussian(rng, planted_len * patch_block, content_sd);

  std::vector<std::vector<double>> pool(cfg.distractor_pool);
  for (auto& f : pool) f = Gaussian(rng, patch_block, content_sd);

  std::vector<std::vector<double>> styles(cfg.num_styles);
  for (auto& sv : styles) {
    sv = Gaussian(rng, dn, 1.0);
    const double n = Norm(sv);
    for (double& v : sv) v *= cfg.nuisance / n;
  }

  const double noise_sd = cfg.noise / std::sqrt(double(d));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Clip> corpus;
  corpus.reserve(cfg.num_clips);
  for (std::size_t c = 0; c < cfg.num_clips; ++c) {
    Clip clip;
    clip.group = static_cast<int>(c % cfg.num_groups);
    const std::size_t offset =
        std::uniform_int_distribution<std::size_t>(0, cfg.frames - planted_len)(rng);
    std::vector<double> latent(cfg.frames * patch_block);
    clip.planted.assign(cfg.frames, -1);
    for (std::size_t t = 0; t < cfg.frames; ++t) {
      double* dst = latent.data() + t * patch_block;
      if (t >= offset && t < offset + planted_len) {
        clip.planted[t] = static_cast<int>(t - offset);
        const auto& src = group_latent[clip.group];
        std::copy_n(src.data() + (t - offset) * patch_block, patch_block, dst);
      } else if (cfg.distractor_rate > 0.0 &&
                 std::bernoulli_distribution(cfg.distractor_rate)(rng)) {
        const auto& src = pool[std::uniform_int_distribution<std::size_t>(
            0, pool.size() - 1)(rng)];
        std::copy(src.begin(), src.end(), dst);
      } else {
        const std::vector<double> fresh = Gaussian(rng, patch_block, content_sd);
        std::copy(fresh.begin(), fresh.end(), dst);
      }
    }
    const std::vector<double>& offset_dir = styles[std::uniform_int_distribution<
        std::size_t>(0, cfg.num_styles - 1)(rng)];

    PatchEmbeddings student(cfg.frames, cfg.patches, d);
    std::vector<double> z(d);
    for (std::size_t t = 0; t < cfg.frames; ++t) {
      for (std::size_t r = 0; r < cfg.patches; ++r) {
        const double* content = latent.data() + t * patch_block + r * dc;
        std::copy_n(content, dc, z.begin());
        std::copy(offset_dir.begin(), offset_dir.end(), z.begin() + dc);
        auto out = student.patch(t, r);
        for (std::size_t i = 0; i < d; ++i) {
          double acc = 0.0;
          for (std::size_t k = 0; k < d; ++k) acc += rotation(i, k) * z[k];
          out[i] = acc + noise_sd * unit(rng);
        }
      }
    }

    std::vector<double> teacher(cfg.frames * cfg.teacher_dim);
    const double teacher_sd = cfg.teacher_noise / std::sqrt(double(cfg.teacher_dim));
    std::vector<double> frame_mean(dc);
    for (std::size_t t = 0; t < cfg.frames; ++t) {
      std::fill(frame_mean.begin(), frame_mean.end(), 0.0);
      for (std::size_t r = 0; r < cfg.patches; ++r) {
        const double* content = latent.data() + t * patch_block + r * dc;
        for (std::size_t k = 0; k < dc; ++k) frame_mean[k] += content[k];
      }
      for (std::size_t i = 0; i < cfg.teacher_dim; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dc; ++k) {
          acc += projection[i * dc + k] * frame_mean[k] / double(cfg.patches);
        }
        teacher[t * cfg.teacher_dim + i] = acc + teacher_sd * unit(rng);
      }
    }
    clip.student = std::move(student);
    clip.teacher = FrameEmbeddings(cfg.frames, cfg.teacher_dim, std::move(teacher));
    corpus.push_back(std::move(clip));
  }
  return corpus;
}

AugmentedClip Augment(const Clip& clip, const AugmentToggles& toggles,
                      std::uint64_t seed) {
  toggles.Validate();
  Rng rng(seed);
  const std::size_t t_in = clip.student.frames();
  std::vector<std::size_t> order(t_in);
  std::iota(order.begin(), order.end(), 0);

  if (toggles.crop_keep < 1.0) {
    const std::size_t len = std::max<std::size_t>(1, RoundCount(toggles.crop_keep, t_in));
    const std::size_t start =
        std::uniform_int_distribution<std::size_t>(0, t_in - len)(rng);
    order = std::vector<std::size_t>(order.begin() + start,
                                     order.begin() + start + len);
  }
  if (toggles.reverse) std::reverse(order.begin(), order.end());
  if (toggles.shuffle) std::shuffle(order.begin(), order.end(), rng);
  if (toggles.dropout > 0.0) {
    const std::size_t drop = RoundCount(toggles.dropout, order.size());
    if (drop >= order.size()) {
      throw ParameterError("dropout " + std::to_string(toggles.dropout) +
                           " removes all " + std::to_string(order.size()) +
                           " frames");
    }
    std::vector<std::size_t> slots(order.size());
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<std::uint8_t> removed(order.size(), 0);
    for (std::size_t k = 0; k < drop; ++k) removed[slots[k]] = 1;
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (!removed[k]) kept.push_back(order[k]);
    }
    order = std::move(kept);
  }

  const std::size_t t_out = order.size();
  const std::size_t r = clip.student.patches();
  const std::size_t d = clip.student.dim();
  const std::size_t dt = clip.teacher.dim();
  AugmentedClip out;
  out.source = order;
  out.clip.group = clip.group;
  out.clip.student = PatchEmbeddings(t_out, r, d);
  std::vector<double> teacher(t_out * dt);
  out.clip.planted.resize(t_out);
  for (std::size_t t = 0; t < t_out; ++t) {
    const std::size_t s = order[t];
    out.clip.planted[t] = clip.planted[s];
    for (std::size_t p = 0; p < r; ++p) {
      const auto src = clip.student.patch(s, p);
      std::copy(src.begin(), src.end(), out.clip.student.patch(t, p).begin());
    }
    const auto tf = clip.teacher.frame(s);
    std::copy(tf.begin(), tf.end(), teacher.begin() + t * dt);
  }
  out.clip.teacher = FrameEmbeddings(t_out, dt, std::move(teacher));
  if (toggles.noise > 0.0) {
    std::normal_distribution<double> dist(0.0, toggles.noise / std::sqrt(double(d)));
    for (double& v : out.clip.student.data()) v += dist(rng);
  }
  return out;
}

Matrix PlantedFrameMap(const Clip& a, const Clip& b) {
  if (a.group != b.group) return Matrix(a.planted.size(), b.planted.size());
  Matrix m(a.planted.size(), b.planted.size());
  for (std::size_t x = 0; x < a.planted.size(); ++x) {
    for (std::size_t y = 0; y < b.planted.size(); ++y) {
      if (a.planted[x] >= 0 && a.planted[x] == b.planted[y]) m(x, y) = 1.0;
    }
  }
  return m;
}

PlantedTeacher PlantedTeacherMatrix(std::size_t rows, std::size_t cols,
                                    double overlap, double noise,
                                    std::uint64_t seed) {
  CheckFraction(overlap, "overlap", /*allow_zero=*/false);
  if (rows == 0 || cols == 0) throw ParameterError("empty planted matrix");
  if (!(noise >= 0.0)) throw ParameterError("noise must be >= 0");
  Rng rng(seed);
  const std::size_t planted = std::max<std::size_t>(1, RoundCount(overlap, cols));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlantedTeacher out{Matrix(rows, cols), Matrix(rows, cols)};
  std::vector<std::size_t> perm(cols);
  for (std::size_t x = 0; x < rows; ++x) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < planted; ++k) out.planted(x, perm[k]) = 1.0;
    for (std::size_t y = 0; y < cols; ++y) {
      out.similarity(x, y) = out.planted(x, y) == 1.0
                                 ? 0.9 - noise * u(rng)
                                 : -0.5 + (0.8 + noise) * u(rng);
    }
  }
  return out;
}

}  // namespace aprank
