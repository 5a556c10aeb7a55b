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

#include "mmloco/rollout.h"

#include <cmath>
#include <sstream>

namespace mmloco {
namespace {

// Stream ids for Rng::Derive.
constexpr std::uint64_t kEvalStream = 0x6576616c;

void PerturbJoints(SimState& s, double noise, const RobotConfig& robot,
                   const Terrain& terrain, Rng& rng) {
  if (noise <= 0.0) return;
  for (int j = 0; j < kNumJoints; ++j) s.q[kHipL + j] += noise * rng.Normal();
  for (int leg = 0; leg < 2; ++leg) {
    const FootKinematics foot = Foot(s, leg, robot);
    s.anchor[leg] = foot.position.x();
    s.contact[leg] = terrain.Height(foot.position.x()) > foot.position.y();
  }
}

}  // namespace

ReferenceTracker::ReferenceTracker(const ReferenceMotion& motion,
                                   double entry_x, double entry_phase) {
  Enter(motion, entry_x, entry_phase);
}

void ReferenceTracker::Enter(const ReferenceMotion& motion, double entry_x,
                             double entry_phase) {
  motion_ = &motion;
  entry_x_ = entry_x;
  entry_phase_ = entry_phase;
  completed_ = false;
}

ReferencePose ReferenceTracker::Advance(double prev_phase,
                                        const SimState& next) {
  if (next.phase < prev_phase) {
    if (motion_->kind == MotionKind::kTransient) {
      completed_ = true;
    } else {
      entry_x_ = next.q[kBaseX];
      entry_phase_ = next.phase;
    }
  }
  return TrackReference(*motion_, next.phase, entry_x_, entry_phase_,
                        completed_);
}

std::string TraceCsv(const std::vector<TraceRow>& rows,
                     const std::vector<std::string>& mode_names,
                     std::uint64_t config_hash) {
  std::ostringstream out;
  out.precision(10);
  out << CsvHeaderComment("trace", config_hash);
  out << "step,time,phase,mode,x,z,pitch,hip_l,knee_l,hip_r,knee_r,"
         "vx,vz,vpitch,vhip_l,vknee_l,vhip_r,vknee_r,contact_l,contact_r,"
         "reward,ref_x,ref_z,ref_pitch\n";
  for (const TraceRow& r : rows) {
    out << r.step << ',' << r.time << ',' << r.phase << ','
        << (r.mode >= 0 && r.mode < static_cast<int>(mode_names.size())
                ? mode_names[r.mode]
                : std::to_string(r.mode));
    for (int i = 0; i < kNumCoords; ++i) out << ',' << r.q[i];
    for (int i = 0; i < kNumCoords; ++i) out << ',' << r.qdot[i];
    out << ',' << r.contact[0] << ',' << r.contact[1] << ',' << r.reward << ','
        << r.reference.x << ',' << r.reference.z << ',' << r.reference.pitch
        << '\n';
  }
  return out.str();
}

Trajectory Rollout(const GaussianPolicy& policy, const ValueFunction* value,
                   const ModeLibrary& library, const EpisodeScript& script,
                   const EnvConfig& env, bool stochastic, Rng& rng,
                   std::vector<TraceRow>* trace) {
  ValidateScript(script, library.size());
  const int horizon = script.horizon;
  const int obs_dim = policy.obs_dim();
  if (obs_dim != 2 + library.latent_dim() + kStateObsDim) {
    throw InvalidInput("policy input size does not match the library latents");
  }

  SimState s = StandingState(env.robot, env.terrain, env.start_x);
  s.clock_rate = env.clock_rate;
  PerturbJoints(s, env.init_noise, env.robot, env.terrain, rng);
  ReferenceTracker tracker(library.motion(script.initial_mode), s.q[kBaseX],
                           s.phase);

  Trajectory traj;
  traj.initial_mode = script.initial_mode;
  traj.final_mode = script.final_mode;
  traj.switch_step = script.switch_step;
  traj.obs.resize(obs_dim, horizon + 1);
  traj.actions.resize(policy.act_dim(), horizon);
  traj.rewards.resize(horizon);
  traj.log_probs.resize(horizon);
  traj.values = Eigen::VectorXd::Zero(horizon + 1);
  if (trace != nullptr) trace->clear();

  auto mode_at = [&](int t) {
    return t < script.switch_step ? script.initial_mode : script.final_mode;
  };
  int steps = 0;
  for (int t = 0; t < horizon; ++t) {
    const int mode = mode_at(t);
    if (t == script.switch_step && script.final_mode != script.initial_mode) {
      tracker.Enter(library.motion(mode), s.q[kBaseX], s.phase);
    }
    const Eigen::VectorXd o =
        Observe(s, library.latent(mode).z, env.robot).Flat();
    const ActResult act = Act(policy, o, stochastic, &rng);
    traj.obs.col(t) = o;
    traj.actions.col(t) = act.action;
    traj.log_probs[t] = act.log_prob;
    if (value != nullptr) traj.values[t] = Value(*value, o);

    const double prev_phase = s.phase;
    const SimState next = Step(s, act.action, env.terrain, env.robot);
    const Termination term = CheckTermination(next, env.robot);
    steps = t + 1;
    if (term == Termination::kBlowup) {
      traj.rewards[t] = 0.0;
      traj.blowup = true;
      traj.terminal = true;
      traj.obs.col(t + 1) = o;
      break;
    }
    const ReferencePose ref = tracker.Advance(prev_phase, next);
    const double r = Reward(next, ref, env.reward).reward;
    traj.rewards[t] = r;
    s = next;
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
      row.reference = ref;
      trace->push_back(row);
    }
    if (term == Termination::kFallen) {
      traj.terminal = true;
      traj.obs.col(t + 1) = Observe(s, library.latent(mode).z, env.robot).Flat();
      break;
    }
    if (t + 1 == horizon) {
      traj.obs.col(t + 1) =
          Observe(s, library.latent(mode_at(t + 1)).z, env.robot).Flat();
      if (value != nullptr) {
        traj.values[t + 1] = Value(*value, traj.obs.col(t + 1));
      }
    }
  }
  traj.obs.conservativeResize(Eigen::NoChange, steps + 1);
  traj.actions.conservativeResize(Eigen::NoChange, steps);
  traj.rewards.conservativeResize(steps);
  traj.log_probs.conservativeResize(steps);
  traj.values.conservativeResize(steps + 1);
  if (traj.terminal) traj.values[steps] = 0.0;
  return traj;
}

double NormalizedReturn(const Trajectory& t, int horizon,
                        const RewardConfig& reward) {
  const double max = horizon * reward.max_step_reward();
  return max > 0.0 ? t.episode_return() / max : 0.0;
}

ModeEvaluation EvaluateModes(const GaussianPolicy& policy,
                             const ModeLibrary& library, const EnvConfig& env,
                             int horizon, int n_rollouts, std::uint64_t seed,
                             int workers) {
  if (n_rollouts < 1) throw InvalidInput("n_rollouts must be >= 1");
  const int n = library.size();
  const int cycle = env.robot.cycle_steps();
  // Jobs 0..n-1 are constant-command runs, then the n*n transitions.
  const int jobs = n + n * n;
  std::vector<double> results(static_cast<size_t>(jobs) * n_rollouts);
  ParallelFor(jobs * n_rollouts, workers, [&](int index) {
    const int job = index / n_rollouts;
    const int k = index % n_rollouts;
    EpisodeScript script;
    script.horizon = horizon;
    if (job < n) {
      script.initial_mode = script.final_mode = job;
      script.switch_clip = 0;
      script.switch_phase = 0.5;
    } else {
      script.initial_mode = (job - n) / n;
      script.final_mode = (job - n) % n;
      script.switch_clip = (k / static_cast<int>(kSwitchPhases.size())) %
                           kSwitchClips;
      script.switch_phase = kSwitchPhases[k % kSwitchPhases.size()];
    }
    script.switch_step =
        SwitchStep(script.switch_clip, script.switch_phase, cycle);
    Rng rng = Rng::Derive(seed, kEvalStream, index);
    const Trajectory t =
        Rollout(policy, nullptr, library, script, env, false, rng);
    results[index] = NormalizedReturn(t, horizon, env.reward);
  });
  ModeEvaluation eval;
  eval.modes = Eigen::VectorXd::Zero(n);
  eval.transitions = Eigen::MatrixXd::Zero(n, n);
  for (int index = 0; index < jobs * n_rollouts; ++index) {
    const int job = index / n_rollouts;
    const double v = results[index] / n_rollouts;
    if (job < n) {
      eval.modes[job] += v;
    } else {
      eval.transitions((job - n) / n, (job - n) % n) += v;
    }
  }
  return eval;
}

double MeanHeadingVelocity(const GaussianPolicy& policy,
                           const ModeLibrary& library, int mode,
                           const EnvConfig& env, int horizon) {
  EpisodeScript script;
  script.initial_mode = script.final_mode = mode;
  script.horizon = horizon;
  script.switch_step = 1;
  Rng rng(0);
  EnvConfig quiet = env;
  quiet.init_noise = 0.0;
  std::vector<TraceRow> trace;
  Rollout(policy, nullptr, library, script, quiet, false, rng, &trace);
  if (trace.empty()) return 0.0;
  return (trace.back().q[kBaseX] - env.start_x) / trace.back().time;
}

Json RewardConfigToJson(const RewardConfig& cfg) {
  Json j;
  j["weights"] = VectorToJson(cfg.weights);
  j["sensitivity"] = VectorToJson(cfg.sensitivity);
  return j;
}

RewardConfig RewardConfigFromJson(const Json& j) {
  RewardConfig c;
  if (j.contains("weights")) c.weights = VectorFromJson(j.at("weights"), 3);
  if (j.contains("sensitivity")) {
    c.sensitivity = VectorFromJson(j.at("sensitivity"), 3);
  }
  if ((c.weights.array() < 0.0).any() || !c.weights.allFinite()) {
    throw InvalidInput("reward weights must be >= 0");
  }
  if ((c.sensitivity.array() < 0.0).any() || !c.sensitivity.allFinite()) {
    throw InvalidInput("reward sensitivities must be >= 0");
  }
  return c;
}

Json EnvConfigToJson(const EnvConfig& env) {
  Json j;
  j["robot"] = RobotConfigToJson(env.robot);
  j["reward"] = RewardConfigToJson(env.reward);
  j["terrain"] = TerrainToJson(env.terrain);
  j["start_x"] = env.start_x;
  j["clock_rate"] = env.clock_rate;
  j["init_noise"] = env.init_noise;
  return j;
}

EnvConfig EnvConfigFromJson(const Json& j) {
  EnvConfig e;
  if (j.contains("robot")) e.robot = RobotConfigFromJson(j.at("robot"));
  if (j.contains("reward")) e.reward = RewardConfigFromJson(j.at("reward"));
  if (j.contains("terrain")) e.terrain = TerrainFromJson(j.at("terrain"));
  e.start_x = j.value("start_x", e.start_x);
  e.clock_rate = j.value("clock_rate", e.clock_rate);
  e.init_noise = j.value("init_noise", e.init_noise);
  if (!(e.clock_rate > 0.0) || !(e.init_noise >= 0.0)) {
    throw InvalidInput("clock rate must be positive and init noise >= 0");
  }
  return e;
}

}  // namespace mmloco
