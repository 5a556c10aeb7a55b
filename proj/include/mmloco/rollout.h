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

#ifndef MMLOCO_ROLLOUT_H_
#define MMLOCO_ROLLOUT_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmloco/biped_sim.h"
#include "mmloco/policy.h"
#include "mmloco/ppo.h"
#include "mmloco/refmotion.h"
#include "mmloco/sampler.h"
#include "mmloco/terrain.h"

namespace mmloco {

struct EnvConfig {
  RobotConfig robot;
  RewardConfig reward;
  Terrain terrain;
  double start_x = 0.0;
  double clock_rate = 1.0;
  // Std of the Gaussian perturbation of the initial joint angles (rad).
  double init_noise = 0.02;
};

// Follows one mode's reference along the episode. The reference x is
// anchored to the robot's x when the mode is entered and again whenever the
// clip wraps; the phase is never reset.
class ReferenceTracker {
 public:
  ReferenceTracker(const ReferenceMotion& motion, double entry_x,
                   double entry_phase);

  // Switches to another mode at the robot's current x and phase.
  void Enter(const ReferenceMotion& motion, double entry_x, double entry_phase);
  // Reference for the state reached after a control step taken from
  // prev_phase.
  ReferencePose Advance(double prev_phase, const SimState& next);

  bool clip_completed() const { return completed_; }

 private:
  const ReferenceMotion* motion_;
  double entry_x_;
  double entry_phase_;
  bool completed_ = false;
};

struct TraceRow {
  int step = 0;
  double time = 0.0;
  double phase = 0.0;
  Coords q = Coords::Zero();
  Coords qdot = Coords::Zero();
  std::array<bool, 2> contact{false, false};
  double reward = 0.0;
  int mode = 0;
  ReferencePose reference;
};

std::string TraceCsv(const std::vector<TraceRow>& rows,
                     const std::vector<std::string>& mode_names,
                     std::uint64_t config_hash);

// Runs one scripted episode. Steps t < switch_step command initial_mode and
// steps t >= switch_step command final_mode. The reward of step t compares
// the state after the step with the active mode's reference. A fall ends the
// episode (terminal); a blow-up ends it with zero reward for that step and
// is flagged. value may be null, leaving values at zero.
Trajectory Rollout(const GaussianPolicy& policy, const ValueFunction* value,
                   const ModeLibrary& library, const EpisodeScript& script,
                   const EnvConfig& env, bool stochastic, Rng& rng,
                   std::vector<TraceRow>* trace = nullptr);

// Normalized return: sum of rewards over horizon * max step reward.
double NormalizedReturn(const Trajectory& t, int horizon,
                        const RewardConfig& reward);

struct ModeEvaluation {
  Eigen::VectorXd modes;        // n, normalized mean returns
  Eigen::MatrixXd transitions;  // n x n
  double mra_modes() const { return modes.mean(); }
  double mra_transitions() const { return transitions.mean(); }
};

// Deterministic-policy evaluation. Each mode is run n_rollouts times as a
// constant-command episode; each transition is run n_rollouts times cycling
// through the six switch points. Initial states are perturbed with
// env.init_noise from streams derived from seed.
ModeEvaluation EvaluateModes(const GaussianPolicy& policy,
                             const ModeLibrary& library, const EnvConfig& env,
                             int horizon, int n_rollouts, std::uint64_t seed,
                             int workers = 1);

// Base x travelled per second in a deterministic constant-command episode
// (up to a fall).
double MeanHeadingVelocity(const GaussianPolicy& policy,
                           const ModeLibrary& library, int mode,
                           const EnvConfig& env, int horizon);

Json EnvConfigToJson(const EnvConfig& env);
EnvConfig EnvConfigFromJson(const Json& j);
Json RewardConfigToJson(const RewardConfig& cfg);
RewardConfig RewardConfigFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_ROLLOUT_H_
