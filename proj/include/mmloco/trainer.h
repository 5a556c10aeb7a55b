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

#ifndef MMLOCO_TRAINER_H_
#define MMLOCO_TRAINER_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmloco/ppo.h"
#include "mmloco/refmotion.h"
#include "mmloco/rollout.h"
#include "mmloco/sampler.h"

namespace mmloco {

struct TrainConfig {
  PpoConfig ppo;
  SamplerKind sampler = SamplerKind::kAdaptive;
  SamplerConfig sampler_config;
  EnvConfig env;
  std::vector<int> hidden{64, 64};
  double init_log_std = kDefaultLogStd;
  int updates = 200;
  int episodes_per_update = 16;
  int workers = 1;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct TrainState {
  PpoLearner learner;
  SamplerState sampler;
  int update = 0;          // updates completed
  long long episodes = 0;  // episodes completed
  int consecutive_failures = 0;
};

struct UpdateLogRow {
  int update = 0;
  long long episodes = 0;
  UpdateStats stats;
  double mean_normalized_return = 0.0;
  std::vector<std::pair<int, int>> sampled;
  Eigen::VectorXd mode_returns;
  Eigen::MatrixXd transition_returns;
};

// Fresh learner: the policy's output bias is the standing holding action so
// that the initial mean action keeps the robot upright.
TrainState InitTraining(const TrainConfig& cfg, const ModeLibrary& library);

// Runs `count` updates. Every update samples episodes_per_update scripts
// from the records at the start of the update, rolls them out (in parallel
// when workers > 1), folds the returns into the records in script order and
// applies one PPO update. Every random stream is derived from (seed, episode
// or update index), so results do not depend on the worker count and a run
// resumed from a checkpoint continues identically. Throws TrainingFailure
// after 5 consecutive rejected updates.
void TrainUpdates(TrainState& state, const TrainConfig& cfg,
                  const ModeLibrary& library, int count,
                  std::vector<UpdateLogRow>* log,
                  const std::function<void(const TrainState&)>& after_update =
                      {});

std::string TrainingLogCsvHeader(int num_modes, std::uint64_t config_hash);
std::string TrainingLogCsvRow(const UpdateLogRow& row);

Json TrainConfigToJson(const TrainConfig& cfg);
TrainConfig TrainConfigFromJson(const Json& j);

Json TrainStateToJson(const TrainState& state);
TrainState TrainStateFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_TRAINER_H_
