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

#include "mmloco/sampler.h"

#include <cmath>
#include <string>

namespace mmloco {
namespace {

EpisodeScript DrawSwitch(int initial, int final, int cycle_steps, int horizon,
                         Rng& rng) {
  EpisodeScript s;
  s.initial_mode = initial;
  s.final_mode = final;
  s.switch_phase = kSwitchPhases[rng.UniformInt(kSwitchPhases.size())];
  s.switch_clip = static_cast<int>(rng.UniformInt(kSwitchClips));
  s.switch_step = SwitchStep(s.switch_clip, s.switch_phase, cycle_steps);
  s.horizon = horizon;
  if (s.switch_step <= 0 || s.switch_step >= horizon) {
    throw InvalidInput("horizon " + std::to_string(horizon) +
                       " is too short for a switch at step " +
                       std::to_string(s.switch_step));
  }
  return s;
}

}  // namespace

std::string_view SamplerKindName(SamplerKind kind) {
  return kind == SamplerKind::kAdaptive ? "adaptive" : "uniform";
}

SamplerKind ParseSamplerKind(std::string_view name) {
  if (name == "adaptive") return SamplerKind::kAdaptive;
  if (name == "uniform") return SamplerKind::kUniform;
  throw InvalidInput("unknown sampler '" + std::string(name) +
                     "' (expected adaptive or uniform)");
}

void SamplerConfig::Validate() const {
  if (!(gamma_initial >= 0.0 && gamma_initial <= 1.0) ||
      !(gamma_final >= 0.0 && gamma_final <= 1.0)) {
    throw InvalidInput("sampler decay factors must lie in [0, 1]");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInput("sampler epsilon must be >= 0");
  }
}

SamplerState SamplerState::Fresh(int num_modes, const SamplerConfig& config) {
  if (num_modes < 1) throw InvalidInput("sampler needs at least one mode");
  config.Validate();
  SamplerState s;
  s.mode_returns = Eigen::VectorXd::Zero(num_modes);
  s.transition_returns = Eigen::MatrixXd::Zero(num_modes, num_modes);
  s.config = config;
  return s;
}

Eigen::VectorXd Returns2Prob(const Eigen::VectorXd& returns, double epsilon) {
  if (returns.size() == 0) throw InvalidInput("returns vector is empty");
  if (!returns.allFinite()) throw InvalidInput("returns must be finite");
  if (!(epsilon >= 0.0)) throw InvalidInput("epsilon must be >= 0");
  Eigen::VectorXd k = -returns;
  k.array() -= k.minCoeff();
  const double max = k.maxCoeff();
  if (max != 0.0) {
    k /= max;
  } else {
    k.setZero();
  }
  k.array() += epsilon;
  const double sum = k.sum();
  if (sum != 0.0) return k / sum;
  return Eigen::VectorXd::Constant(k.size(), 1.0 / static_cast<double>(k.size()));
}

int SwitchStep(int clip, double phase, int cycle_steps) {
  const double x = (clip + phase) * cycle_steps;
  double r = std::round(x);
  if (std::abs(x - std::trunc(x)) == 0.5 && std::fmod(r, 2.0) != 0.0) {
    r -= std::copysign(1.0, x);
  }
  return static_cast<int>(r);
}

int SampleIndex(const Eigen::VectorXd& probs, Rng& rng) {
  const double u = rng.Uniform() * probs.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding at the top end: last entry with nonzero mass.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

EpisodeScript SampleScript(const SamplerState& state, int cycle_steps,
                           int horizon, Rng& rng) {
  const int initial =
      SampleIndex(Returns2Prob(state.mode_returns, state.config.epsilon), rng);
  const int final = SampleIndex(
      Returns2Prob(state.transition_returns.row(initial).transpose(),
                   state.config.epsilon),
      rng);
  return DrawSwitch(initial, final, cycle_steps, horizon, rng);
}

EpisodeScript UniformScript(int num_modes, int cycle_steps, int horizon,
                            Rng& rng) {
  if (num_modes < 1) throw InvalidInput("sampler needs at least one mode");
  const int initial = static_cast<int>(rng.UniformInt(num_modes));
  const int final = static_cast<int>(rng.UniformInt(num_modes));
  return DrawSwitch(initial, final, cycle_steps, horizon, rng);
}

SamplerState UpdateRecords(SamplerState state, const EpisodeScript& script,
                           double episode_return) {
  ValidateScript(script, state.num_modes());
  if (!std::isfinite(episode_return)) {
    throw InvalidInput("episode return must be finite");
  }
  double& ri = state.mode_returns[script.initial_mode];
  ri = state.config.gamma_initial * ri + episode_return;
  double& rf = state.transition_returns(script.initial_mode, script.final_mode);
  rf = state.config.gamma_final * rf + episode_return;
  return state;
}

void ValidateScript(const EpisodeScript& script, int num_modes) {
  if (script.initial_mode < 0 || script.initial_mode >= num_modes ||
      script.final_mode < 0 || script.final_mode >= num_modes) {
    throw InvalidInput("script mode index out of range");
  }
  if (script.switch_step <= 0 || script.switch_step >= script.horizon) {
    throw InvalidInput("script switch step must lie inside the horizon");
  }
}

Json SamplerConfigToJson(const SamplerConfig& cfg) {
  Json j;
  j["gamma_initial"] = cfg.gamma_initial;
  j["gamma_final"] = cfg.gamma_final;
  j["epsilon"] = cfg.epsilon;
  return j;
}

SamplerConfig SamplerConfigFromJson(const Json& j) {
  SamplerConfig c;
  c.gamma_initial = j.value("gamma_initial", c.gamma_initial);
  c.gamma_final = j.value("gamma_final", c.gamma_final);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.Validate();
  return c;
}

Json SamplerStateToJson(const SamplerState& state) {
  Json j;
  j["config"] = SamplerConfigToJson(state.config);
  j["mode_returns"] = VectorToJson(state.mode_returns);
  j["transition_returns"] = MatrixToJson(state.transition_returns);
  return j;
}

SamplerState SamplerStateFromJson(const Json& j) {
  SamplerState s;
  s.config = SamplerConfigFromJson(j.at("config"));
  s.mode_returns = VectorFromJson(j.at("mode_returns"));
  s.transition_returns = MatrixFromJson(j.at("transition_returns"));
  const auto n = s.mode_returns.size();
  if (n < 1 || s.transition_returns.rows() != n ||
      s.transition_returns.cols() != n) {
    throw InvalidInput("sampler record shapes do not match");
  }
  return s;
}

}  // namespace mmloco
