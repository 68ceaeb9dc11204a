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

// Seeded synthetic retrieval corpus. Clips of one group share a planted run
// of latent frames; everything else in a clip is clip-specific. The student
// view adds a per-clip nuisance direction and isotropic noise, the teacher
// view is a low-noise projection of the latent frames, so teacher pseudo
// labels can be scored against the planted frame map.

#ifndef APRANK_SYNTHETIC_H_
#define APRANK_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aprank/matrix.h"
#include "aprank/pseudo_labels.h"
#include "aprank/similarity.h"

namespace aprank {

// Applied in order: crop, reverse, shuffle, dropout, noise. Defaults are all
// off, which makes Augment the identity.
struct AugmentToggles {
  double crop_keep = 1.0;  // Fraction of frames kept by a random window.
  bool reverse = false;
  bool shuffle = false;
  double dropout = 0.0;  // Exactly round(dropout * T) frames are removed.
  double noise = 0.0;    // Expected norm of noise added to each patch.

  void Validate() const;
  bool Any() const;
};

struct SyntheticConfig {
  std::size_t num_clips = 200;
  std::size_t frames = 12;
  std::size_t patches = 4;
  std::size_t dim = 16;
  std::size_t teacher_dim = 8;
  std::size_t num_groups = 50;
  double overlap = 0.8;
  // Expected norm of the isotropic noise added to each unit-scale patch.
  double noise = 0.05;
  // Each clip draws one of `num_styles` shared nuisance offsets of norm
  // `nuisance`, confined to the half of the student space that holds no
  // content. Unrelated clips with the same style look alike until the student
  // map learns to suppress that subspace.
  double nuisance = 1.0;
  std::size_t num_styles = 4;
  // Non-planted frames are copied from a corpus-wide pool of
  // `distractor_pool` latent frames with probability `distractor_rate`, so
  // unrelated clips can share content that no linear map removes.
  std::size_t distractor_pool = 0;
  double distractor_rate = 0.0;
  double teacher_noise = 0.02;
  AugmentToggles augment;
  std::uint64_t seed = 1;

  // Throws ParameterError; overlap must lie in (0, 1].
  void Validate() const;
};

struct Clip {
  PatchEmbeddings student;
  FrameEmbeddings teacher;
  int group = -1;
  // planted[t] is the index of the shared latent frame shown at frame t, or
  // -1 for a clip-specific frame.
  std::vector<int> planted;

  bool operator==(const Clip&) const = default;
};

// Clips are assigned to groups round-robin, so group sizes differ by at most
// one. Bit-identical for equal configs.
std::vector<Clip> GenerateCorpus(const SyntheticConfig& cfg);

struct AugmentedClip {
  Clip clip;
  // source[t] is the input frame shown at output frame t.
  std::vector<std::size_t> source;
};

// Throws ParameterError when dropout would remove every frame.
AugmentedClip Augment(const Clip& clip, const AugmentToggles& toggles,
                      std::uint64_t seed);

// 1 at frame pairs (x, y) of two clips showing the same planted latent
// frame, 0 elsewhere.
Matrix PlantedFrameMap(const Clip& a, const Clip& b);

// A rows x cols teacher-style similarity matrix in which each row has
// round(overlap * cols) planted columns at random positions. Planted entries
// are drawn from [0.9 - noise, 0.9] and the rest from [-0.5, 0.3 + noise], so
// the two populations are separated whenever noise < 0.3.
struct PlantedTeacher {
  Matrix similarity;
  Matrix planted;  // 1 on planted entries, 0 elsewhere.
};
PlantedTeacher PlantedTeacherMatrix(std::size_t rows, std::size_t cols,
                                    double overlap, double noise,
                                    std::uint64_t seed);

}  // namespace aprank

#endif  // APRANK_SYNTHETIC_H_
