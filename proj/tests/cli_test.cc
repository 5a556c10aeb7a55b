// Copyright 2026 The mmloco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mmloco/commands.h"
#include "mmloco/run_config.h"

namespace mmloco {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("mmloco_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with MMLOCO_OUT=<out>; returns the exit code.
  int Run(const std::string& args, const fs::path& out) {
    const std::string cmd = "MMLOCO_OUT='" + out.string() + "' '" +
                            MMLOCO_CLI_PATH + "' " + args + " >'" +
                            (dir_ / "stdout.txt").string() + "' 2>'" +
                            (dir_ / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }
  int Run(const std::string& args) { return Run(args, dir_ / "out"); }
  std::string Stderr() { return Slurp(dir_ / "stderr.txt"); }

  // Tiny end-to-end pipeline into `out`.
  void Pipeline(const fs::path& out) {
    const std::string common = " --preset idle_walk --seed 4";
    ASSERT_EQ(Run("gen-refs" + common, out), 0) << Stderr();
    ASSERT_EQ(Run("train-encoder --epochs 40" + common, out), 0) << Stderr();
    ASSERT_EQ(Run("train-policy --updates 2 --episodes 4 --horizon 100" +
                      common,
                  out),
              0)
        << Stderr();
    ASSERT_EQ(Run("eval --rollouts 1 --horizon 60" + common, out), 0)
        << Stderr();
    ASSERT_EQ(Run("plan --knots 3 --dt 0.3 --goal-x 0.4 --goal-z 0.5 "
                  "--episodes 10 --trials 2" +
                      common,
                  out),
              0)
        << Stderr();
  }

  fs::path dir_;
};

TEST_F(CliTest, GenRefsPi2IsDeterministic) {
  ASSERT_EQ(Run("gen-refs --modeset pi2 --out " + (dir_ / "a.json").string()),
            0);
  ASSERT_EQ(Run("gen-refs --modeset pi2 --out " + (dir_ / "b.json").string()),
            0);
  EXPECT_EQ(Slurp(dir_ / "a.json"), Slurp(dir_ / "b.json"));
  EXPECT_EQ(ReadLibraryFile(dir_ / "a.json").size(), 4);
}

TEST_F(CliTest, UnknownModesetIsValidationError) {
  EXPECT_EQ(Run("gen-refs --modeset pi7"), 1);
  EXPECT_NE(Stderr().find("pi2"), std::string::npos);
}

TEST_F(CliTest, BadFlagsAndConfigsAreValidationErrors) {
  EXPECT_EQ(Run("train-policy --sampler greedy"), 1);
  EXPECT_EQ(Run("plan --knots 0"), 1);
  EXPECT_EQ(Run("frobnicate"), 1);
  std::ofstream(dir_ / "bad.cfg") << R"({"preset": "pi2", "colour": 3})";
  EXPECT_EQ(Run("gen-refs --config " + (dir_ / "bad.cfg").string()), 1);
  EXPECT_NE(Stderr().find("colour"), std::string::npos);
  EXPECT_EQ(Run("eval --policy " + (dir_ / "missing.json").string()), 1);
}

TEST_F(CliTest, EncoderWritesFourLatentsAndMonotoneLoss) {
  ASSERT_EQ(Run("gen-refs --preset pi2"), 0);
  ASSERT_EQ(Run("train-encoder --preset pi2 --epochs 60"), 0) << Stderr();
  const ModeLibrary lib = ReadLibraryFile(dir_ / "out" / "library.json");
  ASSERT_TRUE(lib.has_latents());
  for (int i = 0; i < 4; ++i) EXPECT_EQ(lib.latent(i).z.size(), 4);
  std::ifstream csv(dir_ / "out" / "encoder_loss.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("# mmloco", 0), 0u);
  std::getline(csv, line);
  EXPECT_EQ(line, "epoch,loss,iterate_loss,learning_rate");
  double prev = 1e300;
  int rows = 0;
  while (std::getline(csv, line)) {
    const double loss = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(loss, prev);
    prev = loss;
    ++rows;
  }
  EXPECT_EQ(rows, 61);
}

TEST_F(CliTest, PipelineOutputsAndDeterminism) {
  Pipeline(dir_ / "run1");
  Pipeline(dir_ / "run2");
  for (const char* f : {"library.json", "encoder.json", "policy.json",
                        "training_log.csv", "eval_report.json", "plan.json",
                        "plan_trace.csv", "traces/idle.csv"}) {
    const std::string a = Slurp(dir_ / "run1" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, Slurp(dir_ / "run2" / f)) << f;
  }
  const Json report = ReadJsonFile(dir_ / "run1" / "eval_report.json");
  EXPECT_EQ(report.at("modes").size(), 2u);
  int entries = 0;
  for (const auto& row : report.at("transitions")) {
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      ++entries;
    }
  }
  EXPECT_EQ(entries, 4);
  const Json plan = ReadJsonFile(dir_ / "run1" / "plan.json");
  EXPECT_EQ(plan.at("header").at("knots"), 3);
  EXPECT_EQ(plan.at("header").at("knot_dt"), 0.3);
  EXPECT_EQ(plan.at("knots").size(), 3u);
  for (const auto& k : plan.at("knots")) {
    const std::string name = k.at("name");
    EXPECT_TRUE(name == "idle" || name == "walk_f");
  }
  for (const char* f : {"library.json", "encoder.json", "policy.json",
                        "eval_report.json", "plan.json"}) {
    const Json doc = ReadJsonFile(dir_ / "run1" / f);
    EXPECT_EQ(doc.at("header").at("tool"), "mmloco") << f;
    EXPECT_EQ(doc.at("header").at("config_hash").get<std::string>().size(),
              16u);
  }
  EXPECT_EQ(Slurp(dir_ / "run1" / "training_log.csv").rfind("# mmloco", 0),
            0u);
}

TEST_F(CliTest, PlanBlockTaskFlags) {
  Pipeline(dir_ / "out");
  ASSERT_EQ(Run("plan --preset idle_walk --seed 4 --knots 30 --dt 0.15 "
                "--goal-x 2.0 --goal-z 0.9 --episodes 3 --trials 1 "
                "--terrain " MMLOCO_CONFIG_DIR "/terrains/gap_block.json"),
            0)
      << Stderr();
  const Json plan = ReadJsonFile(dir_ / "out" / "plan.json");
  EXPECT_EQ(plan.at("knots").size(), 30u);
  EXPECT_EQ(plan.at("header").at("goal")[1], 0.9);
  EXPECT_EQ(plan.at("terrain").at("segments").size(), 2u);
}

TEST_F(CliTest, ResumeReproducesUninterruptedRun) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  for (const auto& out : {a, b}) {
    ASSERT_EQ(Run("gen-refs --preset idle_walk", out), 0);
    ASSERT_EQ(Run("train-encoder --preset idle_walk --epochs 30", out), 0);
  }
  const std::string flags = " --preset idle_walk --episodes 4 --horizon 100";
  ASSERT_EQ(Run("train-policy --updates 4" + flags, a), 0) << Stderr();
  ASSERT_EQ(Run("train-policy --updates 2 --checkpoint-every 1" + flags, b), 0);
  ASSERT_EQ(Run("train-policy --updates 4 --resume" + flags, b), 0) << Stderr();
  EXPECT_EQ(Slurp(a / "policy.json"), Slurp(b / "policy.json"));
  EXPECT_EQ(Slurp(a / "training_log.csv"), Slurp(b / "training_log.csv"));
  // A different config cannot resume the checkpoint.
  EXPECT_EQ(Run("train-policy --updates 6 --resume --sampler uniform" + flags,
                b),
            1);
}

TEST_F(CliTest, WorkerCountDoesNotChangeResults) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  for (const auto& out : {a, b}) {
    ASSERT_EQ(Run("gen-refs --preset idle_walk", out), 0);
    ASSERT_EQ(Run("train-encoder --preset idle_walk --epochs 30", out), 0);
  }
  const std::string flags =
      " --preset idle_walk --updates 2 --episodes 6 --horizon 100";
  ASSERT_EQ(Run("train-policy --workers 1" + flags, a), 0);
  ASSERT_EQ(Run("train-policy --workers 3" + flags, b), 0);
  EXPECT_EQ(Slurp(a / "policy.json"), Slurp(b / "policy.json"));
}

TEST(RunConfigTest, PresetsCarryTrainingGains) {
  EXPECT_EQ(PresetConfig("pi1").training.env.reward.weights,
            Eigen::Vector3d(0.5, 0.5, 0.0));
  EXPECT_EQ(PresetConfig("pi2").training.env.reward.weights,
            Eigen::Vector3d(0.5, 0.5, 0.0));
  EXPECT_EQ(PresetConfig("pi3").training.env.reward.weights,
            Eigen::Vector3d(0.35, 0.35, 0.3));
  EXPECT_DOUBLE_EQ(PresetConfig("pi2").training.sampler_config.epsilon, 0.2);
  EXPECT_THROW(PresetConfig("pi4"), InvalidInput);
}

TEST(RunConfigTest, ShippedConfigsLoadWithoutDeviations) {
  for (const char* name : {"pi1.cfg", "pi2.cfg", "pi3.cfg", "plan_gap.cfg",
                           "plan_plateau.cfg", "plan_gap_block.cfg",
                           "smoke.cfg"}) {
    const RunConfig cfg = LoadRunConfig(fs::path(MMLOCO_CONFIG_DIR) / name);
    EXPECT_TRUE(PresetDeviations(cfg).empty()) << name;
  }
  const RunConfig block =
      LoadRunConfig(fs::path(MMLOCO_CONFIG_DIR) / "plan_gap_block.cfg");
  EXPECT_EQ(block.planner.knots, 30);
  EXPECT_EQ(block.planner.knot_dt, 0.15);
  EXPECT_EQ(block.planner.goal.y(), 0.9);
  EXPECT_EQ(block.terrain.segments().size(), 2u);
}

TEST(RunConfigTest, JsonRoundTripSeedsAndHash) {
  RunConfig cfg = PresetConfig("pi3");
  cfg.SetSeed(77);
  EXPECT_EQ(cfg.training.seed, 77u);
  EXPECT_EQ(cfg.encoder.seed, 77u);
  EXPECT_EQ(cfg.planner.seed, 77u);
  const RunConfig back =
      RunConfigFromJson(Json::parse(RunConfigToJson(cfg).dump()));
  EXPECT_EQ(RunConfigToJson(back), RunConfigToJson(cfg));
  EXPECT_EQ(back.Hash(), cfg.Hash());
  RunConfig more = cfg;
  more.SetWorkers(4);
  EXPECT_EQ(more.Hash(), cfg.Hash());
  more.training.env.reward.weights[2] = 0.2;
  EXPECT_NE(more.Hash(), cfg.Hash());
  EXPECT_FALSE(PresetDeviations(more).empty());
}

TEST(RunConfigTest, RejectsBadWeightsAndMissingFiles) {
  Json j = RunConfigToJson(PresetConfig("pi2"));
  j["training"]["env"]["reward"]["weights"] = {0.5, 0.5};
  EXPECT_THROW(RunConfigFromJson(j), InvalidInput);
  Json k = RunConfigToJson(PresetConfig("pi2"));
  k["modeset"] = "/nonexistent/modes.json";
  EXPECT_THROW(RunConfigFromJson(k), InvalidInput);
  Json t = RunConfigToJson(PresetConfig("pi2"));
  t["terrain"] = "no_such_terrain.json";
  EXPECT_THROW(RunConfigFromJson(t), InvalidInput);
}

TEST(RunConfigTest, CustomModesetFileResolvesRelativeToConfig) {
  const RunConfig cfg = RunConfigFromJson(
      Json{{"modeset", "modesets/hard4.json"}}, fs::path(MMLOCO_CONFIG_DIR));
  const auto defs = LoadModeDefinitions(cfg);
  ASSERT_EQ(defs.size(), 4u);
  EXPECT_EQ(defs[3].name, "bound");
}

}  // namespace
}  // namespace mmloco
