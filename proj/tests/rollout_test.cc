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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mmloco/rollout.h"
#include "mmloco/trainer.h"

namespace mmloco {
namespace {

// Builtin library with fixed, distinct latents (no encoder training needed).
ModeLibrary LatentLibrary(const char* selector) {
  ModeLibrary lib = BuiltinLibrary(selector);
  for (int i = 0; i < lib.size(); ++i) {
    Eigen::Vector4d z = Eigen::Vector4d::Zero();
    z[i % 4] = 1.0;
    z[(i + 1) % 4] = 0.1 * i;
    lib.SetLatent(i, {z, lib.motion(i).name});
  }
  return lib;
}

TrainConfig SmallConfig() {
  TrainConfig cfg;
  cfg.ppo.horizon = 100;
  cfg.episodes_per_update = 4;
  cfg.updates = 4;
  cfg.hidden = {16};
  cfg.seed = 5;
  return cfg;
}

// Initialized policy: outputs the standing hold plus small noise.
GaussianPolicy InitialPolicy(const ModeLibrary& lib) {
  return InitTraining(SmallConfig(), lib).learner.policy;
}

EpisodeScript Script(int mi, int mf, int clip, double phase, int horizon = 200) {
  EpisodeScript s;
  s.initial_mode = mi;
  s.final_mode = mf;
  s.switch_clip = clip;
  s.switch_phase = phase;
  s.switch_step = SwitchStep(clip, phase, RobotConfig{}.cycle_steps());
  s.horizon = horizon;
  return s;
}

TEST(RolloutTest, SameModeKeepsLatentConstant) {
  const ModeLibrary lib = LatentLibrary("pi2");
  const GaussianPolicy p = InitialPolicy(lib);
  Rng rng(1);
  const Trajectory t =
      Rollout(p, nullptr, lib, Script(1, 1, 1, 0.5), EnvConfig{}, true, rng);
  const Eigen::VectorXd z = lib.latent(1).z;
  for (int i = 0; i < t.length(); ++i) {
    EXPECT_TRUE(t.obs.col(i).segment(2, 4) == z);
  }
}

TEST(RolloutTest, LatentSwitchesExactlyAtSwitchStep) {
  const ModeLibrary lib = LatentLibrary("pi2");
  const GaussianPolicy p = InitialPolicy(lib);
  for (int clip = 0; clip < kSwitchClips; ++clip) {
    for (double phase : kSwitchPhases) {
      const EpisodeScript s = Script(0, 2, clip, phase);
      EXPECT_EQ(s.switch_step,
                static_cast<int>(std::nearbyint((clip + phase) * 50)));
      Rng rng(2);
      const Trajectory t = Rollout(p, nullptr, lib, s, EnvConfig{}, false, rng);
      ASSERT_GT(t.length(), s.switch_step);
      for (int i = 0; i < t.length(); ++i) {
        const int mode = i < s.switch_step ? 0 : 2;
        EXPECT_TRUE(t.obs.col(i).segment(2, 4) == lib.latent(mode).z)
            << "step " << i;
      }
    }
  }
  EXPECT_EQ(Script(0, 1, 1, 0.25).switch_step, 62);
}

TEST(RolloutTest, RebaseKeepsRewardContinuous) {
  const ModeLibrary lib = LatentLibrary("pi2");
  const GaussianPolicy p = InitialPolicy(lib);
  for (auto [mi, mf] : {std::pair{0, 1}, std::pair{1, 0}}) {
    Rng base_rng(3);
    const Trajectory base =
        Rollout(p, nullptr, lib, Script(mi, mi, 0, 0.5), EnvConfig{}, false,
                base_rng);
    double max_delta = 0.0;
    for (int i = 1; i < base.length(); ++i) {
      max_delta = std::max(max_delta,
                           std::abs(base.rewards[i] - base.rewards[i - 1]));
    }
    for (int clip = 0; clip < kSwitchClips; ++clip) {
      for (double phase : kSwitchPhases) {
        const EpisodeScript s = Script(mi, mf, clip, phase);
        Rng rng(3);
        const Trajectory t =
            Rollout(p, nullptr, lib, s, EnvConfig{}, false, rng);
        ASSERT_GT(t.length(), s.switch_step);
        const int ts = s.switch_step;
        EXPECT_LE(std::abs(t.rewards[ts] - t.rewards[ts - 1]), max_delta + 0.1)
            << mi << ">" << mf << " at " << ts;
      }
    }
  }
}

TEST(RolloutTest, TraceMatchesTrajectory) {
  const ModeLibrary lib = LatentLibrary("pi2");
  const GaussianPolicy p = InitialPolicy(lib);
  Rng rng(4);
  std::vector<TraceRow> trace;
  const Trajectory t =
      Rollout(p, nullptr, lib, Script(0, 1, 0, 0.5, 60), EnvConfig{}, true, rng,
              &trace);
  ASSERT_EQ(static_cast<int>(trace.size()), t.length());
  for (int i = 0; i < t.length(); ++i) EXPECT_EQ(trace[i].reward, t.rewards[i]);
  const std::string csv = TraceCsv(trace, lib.names(), 0x42);
  EXPECT_EQ(csv.rfind("# mmloco", 0), 0u);
  EXPECT_NE(csv.find("step,time,phase,mode"), std::string::npos);
}

TEST(NormalizedReturnTest, CeilingAndFloor) {
  Trajectory t;
  t.rewards = Eigen::VectorXd::Constant(200, 1.0);
  EXPECT_DOUBLE_EQ(NormalizedReturn(t, 200, RewardConfig{}), 1.0);
  t.rewards = Eigen::VectorXd::Zero(1);
  EXPECT_DOUBLE_EQ(NormalizedReturn(t, 200, RewardConfig{}), 0.0);
}

TEST(EvaluateModesTest, ShapeRangeAndWorkerIndependence) {
  const ModeLibrary lib = LatentLibrary("idle_walk");
  const GaussianPolicy p = InitialPolicy(lib);
  const ModeEvaluation a = EvaluateModes(p, lib, EnvConfig{}, 100, 2, 7, 1);
  const ModeEvaluation b = EvaluateModes(p, lib, EnvConfig{}, 100, 2, 7, 3);
  EXPECT_EQ(a.modes.size(), 2);
  EXPECT_EQ(a.transitions.rows(), 2);
  EXPECT_EQ(a.transitions.cols(), 2);
  EXPECT_GE(a.modes.minCoeff(), 0.0);
  EXPECT_LE(a.modes.maxCoeff(), 1.0);
  EXPECT_GE(a.transitions.minCoeff(), 0.0);
  EXPECT_LE(a.transitions.maxCoeff(), 1.0);
  EXPECT_TRUE(a.modes == b.modes);
  EXPECT_TRUE(a.transitions == b.transitions);
}

TEST(TrainerTest, IdleOnlyPolicyHoldsIdle) {
  ModeLibrary full = LatentLibrary("pi2");
  ModeLibrary idle;
  idle.Add(full.motion(0), full.entry(0).latent);
  TrainConfig cfg = SmallConfig();
  TrainState s = InitTraining(cfg, idle);
  TrainUpdates(s, cfg, idle, 3, nullptr);
  Rng rng(1);
  const Trajectory t = Rollout(s.learner.policy, nullptr, idle,
                               Script(0, 0, 0, 0.5), cfg.env, false, rng);
  EXPECT_GT(NormalizedReturn(t, 200, cfg.env.reward), 0.9);
}

TEST(TrainerTest, ReplayIsBitIdenticalAcrossWorkerCounts) {
  const ModeLibrary lib = LatentLibrary("pi2");
  TrainConfig cfg = SmallConfig();
  std::vector<UpdateLogRow> log1, log3;
  TrainState a = InitTraining(cfg, lib);
  TrainUpdates(a, cfg, lib, 3, &log1);
  cfg.workers = 3;
  TrainState b = InitTraining(cfg, lib);
  TrainUpdates(b, cfg, lib, 3, &log3);
  EXPECT_TRUE(a.learner.policy.params == b.learner.policy.params);
  EXPECT_TRUE(a.learner.value.params == b.learner.value.params);
  EXPECT_TRUE(a.sampler.mode_returns == b.sampler.mode_returns);
  ASSERT_EQ(log1.size(), log3.size());
  for (size_t i = 0; i < log1.size(); ++i) {
    EXPECT_EQ(TrainingLogCsvRow(log1[i]), TrainingLogCsvRow(log3[i]));
  }
}

TEST(TrainerTest, CheckpointResumeIsBitIdentical) {
  const ModeLibrary lib = LatentLibrary("pi2");
  const TrainConfig cfg = SmallConfig();
  TrainState straight = InitTraining(cfg, lib);
  std::vector<UpdateLogRow> straight_log;
  TrainUpdates(straight, cfg, lib, 4, &straight_log);

  TrainState first = InitTraining(cfg, lib);
  std::vector<UpdateLogRow> resumed_log;
  TrainUpdates(first, cfg, lib, 2, &resumed_log);
  TrainState resumed =
      TrainStateFromJson(Json::parse(TrainStateToJson(first).dump()));
  TrainUpdates(resumed, cfg, lib, 2, &resumed_log);

  EXPECT_TRUE(resumed.learner.policy.params == straight.learner.policy.params);
  EXPECT_TRUE(resumed.learner.value.params == straight.learner.value.params);
  EXPECT_TRUE(resumed.sampler.transition_returns ==
              straight.sampler.transition_returns);
  EXPECT_EQ(resumed.episodes, straight.episodes);
  ASSERT_EQ(resumed_log.size(), straight_log.size());
  for (size_t i = 0; i < straight_log.size(); ++i) {
    EXPECT_EQ(TrainingLogCsvRow(resumed_log[i]),
              TrainingLogCsvRow(straight_log[i]));
  }
}

TEST(TrainerTest, UniformSamplerLeavesNoModeUnvisited) {
  const ModeLibrary lib = LatentLibrary("pi2");
  TrainConfig cfg = SmallConfig();
  cfg.sampler = SamplerKind::kUniform;
  cfg.episodes_per_update = 16;
  TrainState s = InitTraining(cfg, lib);
  std::vector<UpdateLogRow> log;
  TrainUpdates(s, cfg, lib, 2, &log);
  std::vector<int> seen(4, 0);
  for (const auto& row : log) {
    for (auto [i, f] : row.sampled) seen[i]++;
  }
  for (int c : seen) EXPECT_GT(c, 0);
}

TEST(TrainerTest, LogCsvSchema) {
  const std::string header = TrainingLogCsvHeader(2, 0xabc);
  EXPECT_NE(header.find("kind=training_log"), std::string::npos);
  EXPECT_NE(header.find("update,episodes,applied,policy_loss,value_loss,"
                        "entropy,approx_kl,clip_fraction,mean_norm_return,"
                        "sampled,R_i_0,R_i_1,R_f_0_0,R_f_0_1,R_f_1_0,R_f_1_1"),
            std::string::npos);
}

TEST(TrainerTest, ConfigJsonRoundTrip) {
  TrainConfig cfg = SmallConfig();
  cfg.sampler = SamplerKind::kUniform;
  cfg.env.reward.weights = {0.35, 0.35, 0.3};
  const TrainConfig back =
      TrainConfigFromJson(Json::parse(TrainConfigToJson(cfg).dump()));
  EXPECT_EQ(TrainConfigToJson(back), TrainConfigToJson(cfg));
}

}  // namespace
}  // namespace mmloco
