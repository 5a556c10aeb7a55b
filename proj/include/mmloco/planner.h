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

#ifndef MMLOCO_PLANNER_H_
#define MMLOCO_PLANNER_H_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmloco/common.h"
#include "mmloco/io.h"
#include "mmloco/policy.h"
#include "mmloco/refmotion.h"
#include "mmloco/rollout.h"

namespace mmloco {

struct PlannerConfig {
  int knots = 11;
  double knot_dt = 0.3;                   // s
  Eigen::Vector2d goal{2.0, 0.5};         // base (x, z), world frame
  double alpha = 0.1;                     // Q learning rate floor
  double epsilon = 0.2;                   // exploration rate
  int episodes = 100;
  std::uint64_t seed = 0;

  void Validate() const;
  std::uint64_t Hash() const;
};

// Zero-order spline of mode indices, one per knot.
struct ModePlan {
  std::vector<int> modes;
  std::uint64_t config_hash = 0;
};

// Maps a plan to its per-knot rewards. The planner never sees anything else.
using PlanEvaluator = std::function<Eigen::VectorXd(const ModePlan&)>;

// exp(-|goal - p|), p = (x, z).
double GoalReward(const Eigen::Vector2d& goal, double x, double z);

// Knot active during control step t (steps cover [t dt_c, (t+1) dt_c)).
int KnotAtStep(int step, double control_dt, double knot_dt);
int PlanSteps(int knots, double control_dt, double knot_dt);

// Executes the deterministic policy with the latent switched at knot
// boundaries and sums the goal reward of every step into its knot. After a
// fall every remaining knot gets 0.
Eigen::VectorXd PlanRollout(const ModePlan& plan, const GaussianPolicy& policy,
                            const ModeLibrary& library, const EnvConfig& env,
                            const PlannerConfig& cfg,
                            std::vector<TraceRow>* trace = nullptr);

// Greedy plan from a Q table (k x n); ties go to the lowest mode index.
ModePlan GreedyPlan(const Eigen::MatrixXd& q);

struct QLearnResult {
  Eigen::MatrixXd q;  // knots x modes
  ModePlan plan;      // greedy
  double plan_return = 0.0;
  double solve_seconds = 0.0;
  std::vector<double> episode_returns;
};

// Episodic Q-learning on the knot chain. Each episode draws an
// epsilon-greedy plan, evaluates it once and backs up
// Q[s][a] += a_eff (r_s + max Q[s+1] - Q[s][a]) from the last knot to the
// first, with a_eff = max(alpha, 1 / visits(s, a)) (0 when alpha is 0).
QLearnResult QLearn(const PlanEvaluator& evaluate, int num_modes,
                    const PlannerConfig& cfg);

struct TrialsResult {
  ModePlan plan;
  double plan_return = 0.0;
  int best_trial = 0;
  std::vector<QLearnResult> trials;
};

// Independent QLearn runs with seeds cfg.seed + i; keeps the greedy plan
// with the highest evaluated return (earliest trial on ties). The evaluator
// must be safe to call concurrently when workers > 1.
TrialsResult ParallelTrials(const PlanEvaluator& evaluate, int num_modes,
                            const PlannerConfig& cfg, int trials,
                            int workers = 1);

Json PlannerConfigToJson(const PlannerConfig& cfg);
PlannerConfig PlannerConfigFromJson(const Json& j);

// Plan file: knot start times, mode indices and names.
Json PlanToJson(const ModePlan& plan, const PlannerConfig& cfg,
                const std::vector<std::string>& mode_names);
ModePlan PlanFromJson(const Json& j, const std::vector<std::string>& mode_names);

}  // namespace mmloco

#endif  // MMLOCO_PLANNER_H_
