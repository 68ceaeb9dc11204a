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

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "aprank/errors.h"
#include "aprank/run_config.h"
#include "aprank/tensor_io.h"
#include "test_util.h"

namespace aprank {
namespace {

std::vector<Tensor> SampleTensors() {
  std::mt19937_64 rng(5);
  Tensor a{"scores", DType::kF64, {3, 4}, testing::UniformVector(rng, 12)};
  a.values[0] = 1e-300;
  a.values[1] = -0.0;
  a.values[2] = std::numeric_limits<double>::max();
  Tensor b{"labels", DType::kF32, {3, 4}, {}};
  for (int k = 0; k < 12; ++k) b.values.push_back(k % 3 == 0 ? 1.0 : 0.0);
  Tensor c{"cube", DType::kF32, {2, 1, 2}, {0.5f, -1.25f, 3.0f, 1e-3f}};
  return {a, b, c};
}

TEST(TensorFileTest, RoundTripIsBitExact) {
  const std::vector<Tensor> in = SampleTensors();
  const std::string bytes = EncodeTensorFile(in);
  EXPECT_EQ(bytes.rfind("APTENSOR 1\n", 0), 0u);
  const std::vector<Tensor> out = DecodeTensorFile(bytes);
  ASSERT_EQ(out, in);
  EXPECT_TRUE(std::signbit(out[0].values[1]));
  EXPECT_EQ(EncodeTensorFile(out), bytes);

  const auto path = std::filesystem::temp_directory_path() / "aprank_io_test.apt";
  WriteTensorFile(path.string(), in);
  EXPECT_EQ(ReadTensorFile(path.string()), in);
  std::filesystem::remove(path);
}

TEST(TensorFileTest, EncodeRejectsBadTensors) {
  EXPECT_THROW(EncodeTensorFile({{"a b", DType::kF64, {1}, {1.0}}}), StructuralError);
  EXPECT_THROW(EncodeTensorFile({{"a", DType::kF64, {2, 2}, {1.0}}}), StructuralError);
  EXPECT_THROW(EncodeTensorFile({{"a", DType::kF64, {}, {}}}), StructuralError);
  EXPECT_THROW(EncodeTensorFile({{"a", DType::kF32, {1}, {0.1}}}), StructuralError);
}

TEST(TensorFileTest, DecodeRejectsMalformedInput) {
  const std::string good = EncodeTensorFile(SampleTensors());
  EXPECT_THROW(DecodeTensorFile("NOTATENSOR\n\n"), StructuralError);
  EXPECT_THROW(DecodeTensorFile(good.substr(0, good.size() - 1)), StructuralError);
  EXPECT_THROW(DecodeTensorFile(good + "x"), StructuralError);
  EXPECT_THROW(DecodeTensorFile("APTENSOR 1\ntensor a f16 2\n\n"), StructuralError);
  EXPECT_THROW(DecodeTensorFile("APTENSOR 1\ntensor a f64 2xq\n\n"), StructuralError);
  EXPECT_THROW(DecodeTensorFile("APTENSOR 1\ntensor a f64 1\n"), StructuralError);
  EXPECT_THROW(ReadTensorFile("/nonexistent/aprank.apt"), StructuralError);
}

TEST(TensorFileTest, MatrixView) {
  const std::vector<Tensor> t = SampleTensors();
  const Matrix m = TensorToMatrix(t[0]);
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 4u);
  EXPECT_EQ(m.data(), t[0].values);
  EXPECT_EQ(TensorToMatrix({"v", DType::kF64, {3}, {1, 2, 3}}).rows(), 1u);
  EXPECT_THROW(TensorToMatrix(t[2]), StructuralError);
}

TEST(CheckpointTest, RoundTripsEveryRefinerKind) {
  TrainConfig cfg;
  cfg.data.dim = 5;
  cfg.init_noise = 0.3;
  for (const RefinerKind kind : {RefinerKind::kIdentity, RefinerKind::kAffine, RefinerKind::kConv}) {
    cfg.refiner = kind == RefinerKind::kConv ? RefinerParams::DeltaConv(3) : RefinerParams{};
    cfg.refiner.kind = kind;
    if (kind != RefinerKind::kIdentity) {
      if (kind == RefinerKind::kAffine) cfg.refiner.scale = 1.5;
      cfg.refiner.bias = -0.25;
      cfg.refiner.downsample = 2;
    }
    const Checkpoint ckpt{InitialModel(cfg), ConfigHash(cfg)};
    const std::string bytes = EncodeCheckpoint(ckpt);
    const Checkpoint back = DecodeCheckpoint(bytes);
    EXPECT_EQ(back.model, ckpt.model);
    EXPECT_EQ(back.config_hash, ckpt.config_hash);
    EXPECT_THROW(DecodeCheckpoint(bytes.substr(0, bytes.size() - 3)), StructuralError);
    EXPECT_THROW(DecodeCheckpoint(bytes + '\0'), StructuralError);
    cfg.refiner.scale = 1.5;
    if (kind != RefinerKind::kAffine) EXPECT_THROW(cfg.refiner.Validate(), ParameterError);
    std::string bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(DecodeCheckpoint(bad), StructuralError);
  }
}

TEST(RunConfigTest, ParseText) {
  const ConfigEntries e = ParseConfigText("# comment\n seed = 9 \n\noptim.lr=1e-3 # tail\n");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0], (std::pair<std::string, std::string>{"seed", "9"}));
  EXPECT_EQ(e[1], (std::pair<std::string, std::string>{"optim.lr", "1e-3"}));
  EXPECT_THROW(ParseConfigText("seed 9\n"), ParameterError);
  EXPECT_THROW(ParseConfigText(" = 9\n"), ParameterError);
  EXPECT_THROW(ParseConfigText("seed=1\nseed=2\n"), ParameterError);
}

TEST(RunConfigTest, ApplyAndDescribeRoundTrip) {
  const TrainConfig cfg = ApplyConfig(
      TrainConfig{}, {{"seed", "42"}, {"loss.video", "smooth"}, {"optim.lr", "0.1"},
                      {"refiner.kind", "affine"}, {"augment.reverse", "true"},
                      {"labels.top", "0.3"}, {"data.noise", "0.123456789012345"}});
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.video_loss, VideoLoss::kSmoothAp);
  EXPECT_EQ(cfg.optimizer.learning_rate, 0.1);
  EXPECT_EQ(cfg.refiner.kind, RefinerKind::kAffine);
  EXPECT_TRUE(cfg.data.augment.reverse);
  EXPECT_EQ(cfg.data.noise, 0.123456789012345);

  const ConfigEntries described = DescribeConfig(cfg);
  EXPECT_EQ(described.size(), ConfigKeys().size());
  const TrainConfig again = ApplyConfig(TrainConfig{}, described);
  EXPECT_EQ(DescribeConfig(again), described);
  EXPECT_EQ(ConfigHash(again), ConfigHash(cfg));
  EXPECT_EQ(ParseConfigText(FormatConfig(described)), described);
}

TEST(RunConfigTest, HashTracksEveryField) {
  const TrainConfig base;
  const std::uint64_t h = ConfigHash(base);
  EXPECT_EQ(ConfigHash(TrainConfig{}), h);
  TrainConfig c = base;
  c.optimizer.learning_rate *= 1.0 + 1e-15;
  EXPECT_NE(ConfigHash(c), h);
  c = base;
  c.data.augment.shuffle = true;
  EXPECT_NE(ConfigHash(c), h);
}

TEST(RunConfigTest, ErrorsAreCollected) {
  try {
    ApplyConfig(TrainConfig{}, {{"bogus", "1"}, {"optim.lr", "fast"}, {"iterations", "-3"}});
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bogus"), std::string::npos) << what;
    EXPECT_NE(what.find("optim.lr"), std::string::npos) << what;
    EXPECT_NE(what.find("iterations"), std::string::npos) << what;
  }
  EXPECT_THROW(ApplyConfig(TrainConfig{}, {{"loss.video", "hinge"}}), ParameterError);
  EXPECT_THROW(ApplyConfig(TrainConfig{}, {{"augment.reverse", "yes"}}), ParameterError);
  EXPECT_THROW(ApplyConfig(TrainConfig{}, {{"loss.tau_nce", "0"}}), ParameterError);
}

}  // namespace
}  // namespace aprank
