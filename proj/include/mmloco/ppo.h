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

#ifndef MMLOCO_PPO_H_
#define MMLOCO_PPO_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmloco/adam.h"
#include "mmloco/common.h"
#include "mmloco/io.h"
#include "mmloco/policy.h"

namespace mmloco {

struct PpoConfig {
  double discount = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 4;
  int minibatches = 4;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  int horizon = 200;           // control steps per episode
  std::uint64_t seed = 0;

  void Validate() const;
};

// One episode. obs has T + 1 columns (o_0 .. o_T); values likewise.
struct Trajectory {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd values;
  bool terminal = false;  // fell: the final state is absorbing
  bool blowup = false;    // simulation produced non-finite values
  int initial_mode = 0;
  int final_mode = 0;
  int switch_step = 0;

  int length() const { return static_cast<int>(rewards.size()); }
  double episode_return() const { return rewards.sum(); }
};

struct Advantages {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;  // advantages + values (value targets)
};

// Generalized advantage estimation. values holds V(o_0) .. V(o_T); V(o_T) is
// replaced by 0 for terminal episodes.
Advantages ComputeGae(const Eigen::VectorXd& rewards,
                      const Eigen::VectorXd& values, bool terminal,
                      double discount, double lambda);

// Clipped surrogate on a batch (columns = samples). loss is
// -mean(min(rho A, clip(rho) A)) - entropy_coef * entropy; grad is with
// respect to policy.params.
struct SurrogateResult {
  double loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  Eigen::VectorXd grad;
};

SurrogateResult SurrogateLoss(const GaussianPolicy& policy,
                              const Eigen::MatrixXd& obs,
                              const Eigen::MatrixXd& actions,
                              const Eigen::VectorXd& old_log_probs,
                              const Eigen::VectorXd& advantages,
                              double clip_ratio, double entropy_coef);

struct ValueLossResult {
  double loss = 0.0;  // mean squared error
  Eigen::VectorXd grad;
};

ValueLossResult ValueLoss(const ValueFunction& value, const Eigen::MatrixXd& obs,
                          const Eigen::VectorXd& targets);

struct PpoLearner {
  GaussianPolicy policy;
  ValueFunction value;
  AdamState policy_adam;
  AdamState value_adam;

  static PpoLearner Create(GaussianPolicy policy, ValueFunction value);
};

struct UpdateStats {
  bool applied = false;
  std::string failure;
  int samples = 0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  // Mean episode return per (initial, final) mode pair.
  std::map<std::pair<int, int>, double> mean_return;
};

// Advantages are normalized over the whole batch. On a non-finite loss or
// gradient the learner is left unchanged and stats.failure is set.
UpdateStats PpoUpdate(PpoLearner& learner,
                      const std::vector<Trajectory>& trajectories,
                      const PpoConfig& cfg, Rng& rng);

Json PpoConfigToJson(const PpoConfig& cfg);
PpoConfig PpoConfigFromJson(const Json& j);
Json AdamStateToJson(const AdamState& state);
AdamState AdamStateFromJson(const Json& j, Eigen::Index size);

}  // namespace mmloco

#endif  // MMLOCO_PPO_H_
