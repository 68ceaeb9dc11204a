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

// Runs the aprank binary and checks exit codes and written reports.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string output;
};

CliRun Cli(const std::string& args) {
  const std::string cmd = std::string("\"") + APRANK_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe)) out += buf;
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aprank_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Out() const { return "--out \"" + dir_.string() + "\" "; }
  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  const CliRun help = Cli("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.output.find("Exit codes"), std::string::npos);
  EXPECT_EQ(Cli("").code, 2);
  EXPECT_EQ(Cli("frobnicate").code, 2);
  EXPECT_EQ(Cli("--threads 0 bench-loss").code, 2);
  EXPECT_EQ(Cli(Out() + "bench-loss --losses hinge").code, 2);
}

TEST_F(CliTest, BenchLossWritesCsv) {
  const CliRun r = Cli(Out() + "--deterministic --seed 3 bench-loss --seeds 2");
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string csv = Slurp(dir_ / "bench_loss.csv");
  EXPECT_NE(csv.find("quadlinear,0.1,5,40"), std::string::npos) << csv;
  EXPECT_NE(r.output.find("|R-'| = 40"), std::string::npos) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "bench_loss_timing.json"));
}

TEST_F(CliTest, EvalCsvAndVerify) {
  std::ofstream(dir_ / "s.csv") << "0.9,0.8,0.7\n0.9,0.1\n";
  std::ofstream(dir_ / "l.csv") << "1,0,1\n0,1\n";
  const CliRun r = Cli(Out() + "eval --scores \"" + (dir_ / "s.csv").string() + "\" --labels \"" +
                    (dir_ / "l.csv").string() + "\" --verify");
  ASSERT_EQ(r.code, 0) << r.output;
  const nlohmann::json j = nlohmann::json::parse(Slurp(dir_ / "eval.json"));
  EXPECT_NEAR(j["metrics"]["mean_ap"].get<double>(), (5.0 / 6.0 + 0.5) / 2.0, 1e-15);
  EXPECT_EQ(j["verify"]["mismatches"].get<int>(), 0);

  std::ofstream(dir_ / "bad.csv") << "1,0\n0,1\n";
  EXPECT_EQ(Cli(Out() + "eval --scores \"" + (dir_ / "s.csv").string() + "\" --labels \"" +
                (dir_ / "bad.csv").string() + "\"")
                .code,
            2);
  std::ofstream(dir_ / "none.csv") << "0,0,0\n0,0\n";
  EXPECT_EQ(Cli(Out() + "eval --scores \"" + (dir_ / "s.csv").string() + "\" --labels \"" +
                (dir_ / "none.csv").string() + "\"")
                .code,
            2);
}

TEST_F(CliTest, TrainWritesReportAndRejectsBadKeys) {
  const CliRun r = Cli(Out() + "--deterministic --seed 5 train --iterations 5");
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"report.json", "history.csv", "evals.csv", "config.txt", "model.ckpt"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const nlohmann::json j = nlohmann::json::parse(Slurp(dir_ / "report.json"));
  EXPECT_EQ(j["seed"].get<int>(), 5);
  EXPECT_EQ(j["loss_rows"].size(), 5u);
  EXPECT_FALSE(j.contains("wall_clock_seconds"));

  const CliRun bad = Cli(Out() + "train --set optim.speed=3");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.output.find("optim.lr"), std::string::npos) << bad.output;
}

TEST_F(CliTest, DivergenceExitsThreeWithSnapshot) {
  const CliRun r = Cli(Out() + "train --iterations 5 --set optim.lr=1e200");
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "snapshot.json"));
  EXPECT_TRUE(fs::exists(dir_ / "snapshot.ckpt"));
}

TEST_F(CliTest, AblateTemporalRateIncludesMeanPooling) {
  const CliRun r = Cli(Out() + "ablate --axis k_t --grid 0.1,1.0");
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string csv = Slurp(dir_ / "ablate_k_t.csv");
  EXPECT_EQ(csv.rfind("k_t,runs,mean_ap,micro_ap\n", 0), 0u) << csv;
  EXPECT_EQ(Cli(Out() + "ablate --axis colour --grid 1").code, 2);
}

}  // namespace
