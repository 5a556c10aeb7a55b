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

#include "mmloco/planner.h"

#include <chrono>
#include <cmath>

namespace mmloco {
namespace {

int ArgMax(const Eigen::MatrixXd& q, int row) {
  int best = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(row, a) > q(row, best)) best = a;
  }
  return best;
}

}  // namespace

void PlannerConfig::Validate() const {
  if (knots < 1) throw InvalidInput("planner needs at least one knot");
  if (!(knot_dt > 0.0)) throw InvalidInput("knot duration must be positive");
  if (!goal.allFinite()) throw InvalidInput("goal must be finite");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidInput("Q learning rate must lie in [0, 1]");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidInput("exploration rate must lie in [0, 1]");
  }
  if (episodes < 0) throw InvalidInput("episodes must be >= 0");
}

std::uint64_t PlannerConfig::Hash() const {
  return Fnv1a64(PlannerConfigToJson(*this).dump());
}

double GoalReward(const Eigen::Vector2d& goal, double x, double z) {
  return std::exp(-(goal - Eigen::Vector2d(x, z)).norm());
}

int KnotAtStep(int step, double control_dt, double knot_dt) {
  return static_cast<int>(std::floor(step * control_dt / knot_dt + 1e-9));
}

int PlanSteps(int knots, double control_dt, double knot_dt) {
  return static_cast<int>(std::lround(knots * knot_dt / control_dt));
}

Eigen::VectorXd PlanRollout(const ModePlan& plan, const GaussianPolicy& policy,
                            const ModeLibrary& library, const EnvConfig& env,
                            const PlannerConfig& cfg,
                            std::vector<TraceRow>* trace) {
  const int k = static_cast<int>(plan.modes.size());
  if (k != cfg.knots) throw InvalidInput("plan length does not match knots");
  for (int m : plan.modes) {
    if (m < 0 || m >= library.size()) {
      throw InvalidInput("plan mode index out of range");
    }
  }
  const double cdt = env.robot.control_dt;
  const int steps = PlanSteps(k, cdt, cfg.knot_dt);
  Eigen::VectorXd rewards = Eigen::VectorXd::Zero(k);
  SimState s = StandingState(env.robot, env.terrain, env.start_x);
  s.clock_rate = env.clock_rate;
  if (trace != nullptr) trace->clear();
  for (int t = 0; t < steps; ++t) {
    const int knot = std::min(KnotAtStep(t, cdt, cfg.knot_dt), k - 1);
    const int mode = plan.modes[knot];
    const Eigen::VectorXd o =
        Observe(s, library.latent(mode).z, env.robot).Flat();
    const ActResult act = Act(policy, o, false, nullptr);
    const SimState next = Step(s, act.action, env.terrain, env.robot);
    const Termination term = CheckTermination(next, env.robot);
    if (term == Termination::kBlowup) break;
    s = next;
    const double r = GoalReward(cfg.goal, s.q[kBaseX], s.q[kBaseZ]);
    rewards[knot] += r;
    if (trace != nullptr) {
      TraceRow row;
      row.step = t;
      row.time = s.time;
      row.phase = s.phase;
      row.q = s.q;
      row.qdot = s.qdot;
      row.contact = s.contact;
      row.reward = r;
      row.mode = mode;
      row.reference.x = cfg.goal.x();
      row.reference.z = cfg.goal.y();
      trace->push_back(row);
    }
    if (term == Termination::kFallen) break;
  }
  return rewards;
}

ModePlan GreedyPlan(const Eigen::MatrixXd& q) {
  ModePlan plan;
  for (int s = 0; s < q.rows(); ++s) plan.modes.push_back(ArgMax(q, s));
  return plan;
}

QLearnResult QLearn(const PlanEvaluator& evaluate, int num_modes,
                    const PlannerConfig& cfg) {
  cfg.Validate();
  if (num_modes < 1) throw InvalidInput("planner needs at least one mode");
  const auto start = std::chrono::steady_clock::now();
  const int k = cfg.knots;
  QLearnResult out;
  out.q = Eigen::MatrixXd::Zero(k, num_modes);
  Eigen::MatrixXi visits = Eigen::MatrixXi::Zero(k, num_modes);
  Rng rng(cfg.seed);
  const std::uint64_t hash = cfg.Hash();
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    ModePlan plan;
    plan.config_hash = hash;
    for (int s = 0; s < k; ++s) {
      plan.modes.push_back(
          rng.Uniform() < cfg.epsilon
              ? static_cast<int>(rng.UniformInt(num_modes))
              : ArgMax(out.q, s));
    }
    const Eigen::VectorXd r = evaluate(plan);
    if (r.size() != k || !r.allFinite()) {
      throw InvalidInput("plan evaluator must return k finite rewards");
    }
    out.episode_returns.push_back(r.sum());
    for (int s = k - 1; s >= 0; --s) {
      const int a = plan.modes[s];
      const double next = s + 1 < k ? out.q.row(s + 1).maxCoeff() : 0.0;
      ++visits(s, a);
      const double rate =
          cfg.alpha > 0.0 ? std::max(cfg.alpha, 1.0 / visits(s, a)) : 0.0;
      out.q(s, a) += rate * (r[s] + next - out.q(s, a));
    }
  }
  out.plan = GreedyPlan(out.q);
  out.plan.config_hash = hash;
  out.plan_return = evaluate(out.plan).sum();
  out.solve_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return out;
}

TrialsResult ParallelTrials(const PlanEvaluator& evaluate, int num_modes,
                            const PlannerConfig& cfg, int trials, int workers) {
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  TrialsResult out;
  out.trials.resize(trials);
  ParallelFor(trials, workers, [&](int i) {
    PlannerConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    out.trials[i] = QLearn(evaluate, num_modes, c);
  });
  for (int i = 0; i < trials; ++i) {
    if (i == 0 || out.trials[i].plan_return > out.plan_return) {
      out.plan_return = out.trials[i].plan_return;
      out.plan = out.trials[i].plan;
      out.best_trial = i;
    }
  }
  out.plan.config_hash = cfg.Hash();
  return out;
}

Json PlannerConfigToJson(const PlannerConfig& cfg) {
  Json j;
  j["knots"] = cfg.knots;
  j["knot_dt"] = cfg.knot_dt;
  j["goal"] = {cfg.goal.x(), cfg.goal.y()};
  j["alpha"] = cfg.alpha;
  j["epsilon"] = cfg.epsilon;
  j["episodes"] = cfg.episodes;
  j["seed"] = cfg.seed;
  return j;
}

PlannerConfig PlannerConfigFromJson(const Json& j) {
  PlannerConfig c;
  c.knots = j.value("knots", c.knots);
  c.knot_dt = j.value("knot_dt", c.knot_dt);
  if (j.contains("goal")) {
    const auto g = j.at("goal").get<std::vector<double>>();
    if (g.size() != 2) throw InvalidInput("goal must be [x, z]");
    c.goal = {g[0], g[1]};
  }
  c.alpha = j.value("alpha", c.alpha);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.episodes = j.value("episodes", c.episodes);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

Json PlanToJson(const ModePlan& plan, const PlannerConfig& cfg,
                const std::vector<std::string>& mode_names) {
  Json j;
  j["planner"] = PlannerConfigToJson(cfg);
  Json knots = Json::array();
  for (size_t i = 0; i < plan.modes.size(); ++i) {
    const int m = plan.modes[i];
    if (m < 0 || m >= static_cast<int>(mode_names.size())) {
      throw InvalidInput("plan mode index out of range");
    }
    knots.push_back({{"knot", i},
                     {"start_time", static_cast<double>(i) * cfg.knot_dt},
                     {"mode", m},
                     {"name", mode_names[m]}});
  }
  j["knots"] = knots;
  return j;
}

ModePlan PlanFromJson(const Json& j,
                      const std::vector<std::string>& mode_names) {
  ModePlan plan;
  for (const Json& k : j.at("knots")) {
    const std::string name = k.at("name").get<std::string>();
    int index = -1;
    for (size_t m = 0; m < mode_names.size(); ++m) {
      if (mode_names[m] == name) index = static_cast<int>(m);
    }
    if (index < 0) throw InvalidInput("plan names unknown mode '" + name + "'");
    plan.modes.push_back(index);
  }
  return plan;
}

}  // namespace mmloco
