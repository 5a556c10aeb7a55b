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

#include "mmloco/trainer.h"

#include <sstream>

namespace mmloco {
namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kScriptStream = 0x73637270;
constexpr std::uint64_t kEpisodeStream = 0x65706973;
constexpr std::uint64_t kUpdateStream = 0x75706474;
constexpr int kMaxConsecutiveFailures = 5;

}  // namespace

void TrainConfig::Validate() const {
  ppo.Validate();
  sampler_config.Validate();
  if (updates < 0 || episodes_per_update < 1 || workers < 1) {
    throw InvalidInput(
        "updates must be >= 0, episodes per update and workers >= 1");
  }
  for (int h : hidden) {
    if (h < 1) throw InvalidInput("hidden layer sizes must be positive");
  }
  const int cycle = env.robot.cycle_steps();
  if (SwitchStep(kSwitchClips - 1, kSwitchPhases.back(), cycle) >=
      ppo.horizon) {
    throw InvalidInput("horizon is shorter than the latest switch step");
  }
}

TrainState InitTraining(const TrainConfig& cfg, const ModeLibrary& library) {
  cfg.Validate();
  if (!library.has_latents()) {
    throw InvalidInput("library has no latents; train the encoder first");
  }
  const int obs_dim = 2 + library.latent_dim() + kStateObsDim;
  Rng rng = Rng::Derive(cfg.seed, kInitStream);
  GaussianPolicy policy =
      MakePolicy(obs_dim, kNumJoints, cfg.hidden, rng, cfg.init_log_std);
  policy.obs_scale = BipedObsScale(library.latent_dim());
  const Terrain flat;
  const SimState stand = StandingState(cfg.env.robot, flat);
  SetOutputBias(policy, HoldingAction(stand, flat, cfg.env.robot));
  ValueFunction value = MakeValueFunction(obs_dim, cfg.hidden, rng);
  value.obs_scale = policy.obs_scale;

  TrainState state;
  state.learner = PpoLearner::Create(std::move(policy), std::move(value));
  state.sampler = SamplerState::Fresh(library.size(), cfg.sampler_config);
  return state;
}

void TrainUpdates(TrainState& state, const TrainConfig& cfg,
                  const ModeLibrary& library, int count,
                  std::vector<UpdateLogRow>* log,
                  const std::function<void(const TrainState&)>& after_update) {
  cfg.Validate();
  if (state.sampler.num_modes() != library.size()) {
    throw InvalidInput("sampler records do not match the library size");
  }
  const int n_eps = cfg.episodes_per_update;
  const int cycle = cfg.env.robot.cycle_steps();
  for (int u = 0; u < count; ++u) {
    std::vector<EpisodeScript> scripts(n_eps);
    for (int j = 0; j < n_eps; ++j) {
      Rng rng = Rng::Derive(cfg.seed, kScriptStream, state.episodes + j);
      scripts[j] = cfg.sampler == SamplerKind::kAdaptive
                       ? SampleScript(state.sampler, cycle, cfg.ppo.horizon, rng)
                       : UniformScript(library.size(), cycle, cfg.ppo.horizon,
                                       rng);
    }
    std::vector<Trajectory> trajectories(n_eps);
    const PpoLearner& learner = state.learner;
    ParallelFor(n_eps, cfg.workers, [&](int j) {
      Rng rng = Rng::Derive(cfg.seed, kEpisodeStream, state.episodes + j);
      trajectories[j] = Rollout(learner.policy, &learner.value, library,
                                scripts[j], cfg.env, true, rng);
    });

    UpdateLogRow row;
    for (int j = 0; j < n_eps; ++j) {
      const double ret = trajectories[j].episode_return();
      state.sampler = UpdateRecords(std::move(state.sampler), scripts[j], ret);
      row.sampled.emplace_back(scripts[j].initial_mode, scripts[j].final_mode);
      row.mean_normalized_return +=
          NormalizedReturn(trajectories[j], cfg.ppo.horizon, cfg.env.reward) /
          n_eps;
    }
    state.episodes += n_eps;

    Rng update_rng = Rng::Derive(cfg.seed, kUpdateStream, state.update);
    row.stats = PpoUpdate(state.learner, trajectories, cfg.ppo, update_rng);
    ++state.update;
    if (row.stats.applied) {
      state.consecutive_failures = 0;
    } else if (++state.consecutive_failures >= kMaxConsecutiveFailures) {
      throw TrainingFailure("PPO update rejected " +
                            std::to_string(state.consecutive_failures) +
                            " times in a row (last: " + row.stats.failure +
                            ") at update " + std::to_string(state.update));
    }
    row.update = state.update;
    row.episodes = state.episodes;
    row.mode_returns = state.sampler.mode_returns;
    row.transition_returns = state.sampler.transition_returns;
    if (log != nullptr) log->push_back(std::move(row));
    if (after_update) after_update(state);
  }
}

std::string TrainingLogCsvHeader(int num_modes, std::uint64_t config_hash) {
  std::ostringstream out;
  out << CsvHeaderComment("training_log", config_hash);
  out << "update,episodes,applied,policy_loss,value_loss,entropy,approx_kl,"
         "clip_fraction,mean_norm_return,sampled";
  for (int i = 0; i < num_modes; ++i) out << ",R_i_" << i;
  for (int i = 0; i < num_modes; ++i) {
    for (int f = 0; f < num_modes; ++f) out << ",R_f_" << i << '_' << f;
  }
  out << '\n';
  return out.str();
}

std::string TrainingLogCsvRow(const UpdateLogRow& row) {
  std::ostringstream out;
  out.precision(10);
  const UpdateStats& s = row.stats;
  out << row.update << ',' << row.episodes << ',' << (s.applied ? 1 : 0) << ','
      << s.policy_loss << ',' << s.value_loss << ',' << s.entropy << ','
      << s.approx_kl << ',' << s.clip_fraction << ','
      << row.mean_normalized_return << ',';
  for (size_t i = 0; i < row.sampled.size(); ++i) {
    if (i > 0) out << ';';
    out << row.sampled[i].first << '>' << row.sampled[i].second;
  }
  for (Eigen::Index i = 0; i < row.mode_returns.size(); ++i) {
    out << ',' << row.mode_returns[i];
  }
  for (Eigen::Index i = 0; i < row.transition_returns.rows(); ++i) {
    for (Eigen::Index f = 0; f < row.transition_returns.cols(); ++f) {
      out << ',' << row.transition_returns(i, f);
    }
  }
  out << '\n';
  return out.str();
}

Json TrainConfigToJson(const TrainConfig& cfg) {
  Json j;
  j["ppo"] = PpoConfigToJson(cfg.ppo);
  j["sampler"] = std::string(SamplerKindName(cfg.sampler));
  j["sampler_config"] = SamplerConfigToJson(cfg.sampler_config);
  j["env"] = EnvConfigToJson(cfg.env);
  j["hidden"] = cfg.hidden;
  j["init_log_std"] = cfg.init_log_std;
  j["updates"] = cfg.updates;
  j["episodes_per_update"] = cfg.episodes_per_update;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  return j;
}

TrainConfig TrainConfigFromJson(const Json& j) {
  TrainConfig c;
  if (j.contains("ppo")) c.ppo = PpoConfigFromJson(j.at("ppo"));
  if (j.contains("sampler")) {
    c.sampler = ParseSamplerKind(j.at("sampler").get<std::string>());
  }
  if (j.contains("sampler_config")) {
    c.sampler_config = SamplerConfigFromJson(j.at("sampler_config"));
  }
  if (j.contains("env")) c.env = EnvConfigFromJson(j.at("env"));
  c.hidden = j.value("hidden", c.hidden);
  c.init_log_std = j.value("init_log_std", c.init_log_std);
  c.updates = j.value("updates", c.updates);
  c.episodes_per_update = j.value("episodes_per_update", c.episodes_per_update);
  c.workers = j.value("workers", c.workers);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

Json TrainStateToJson(const TrainState& state) {
  Json j;
  j["policy"] = PolicyToJson(state.learner.policy);
  j["value"] = ValueToJson(state.learner.value);
  j["policy_adam"] = AdamStateToJson(state.learner.policy_adam);
  j["value_adam"] = AdamStateToJson(state.learner.value_adam);
  j["sampler"] = SamplerStateToJson(state.sampler);
  j["update"] = state.update;
  j["episodes"] = state.episodes;
  j["consecutive_failures"] = state.consecutive_failures;
  return j;
}

TrainState TrainStateFromJson(const Json& j) {
  TrainState s;
  s.learner.policy = PolicyFromJson(j.at("policy"));
  s.learner.value = ValueFromJson(j.at("value"));
  s.learner.policy_adam = AdamStateFromJson(
      j.at("policy_adam"), s.learner.policy.params.size());
  s.learner.value_adam =
      AdamStateFromJson(j.at("value_adam"), s.learner.value.params.size());
  s.sampler = SamplerStateFromJson(j.at("sampler"));
  s.update = j.at("update").get<int>();
  s.episodes = j.at("episodes").get<long long>();
  s.consecutive_failures = j.value("consecutive_failures", 0);
  return s;
}

}  // namespace mmloco
