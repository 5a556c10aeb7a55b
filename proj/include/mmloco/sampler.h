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

#ifndef MMLOCO_SAMPLER_H_
#define MMLOCO_SAMPLER_H_

#include <array>
#include <string_view>

#include <Eigen/Dense>

#include "mmloco/common.h"
#include "mmloco/io.h"

namespace mmloco {

inline constexpr std::array<double, 3> kSwitchPhases = {0.25, 0.5, 0.75};
inline constexpr int kSwitchClips = 2;  // clip_s in {0, 1}

enum class SamplerKind { kAdaptive, kUniform };

std::string_view SamplerKindName(SamplerKind kind);
SamplerKind ParseSamplerKind(std::string_view name);

struct SamplerConfig {
  double gamma_initial = 0.4;  // decay of the per-mode records
  double gamma_final = 0.4;    // decay of the per-transition records
  double epsilon = 0.2;        // probability floor

  void Validate() const;
};

// Decayed episode-return records driving the adaptive distributions.
struct SamplerState {
  Eigen::VectorXd mode_returns;        // R_i, n
  Eigen::MatrixXd transition_returns;  // R_f, n x n (row = initial mode)
  SamplerConfig config;

  static SamplerState Fresh(int num_modes, const SamplerConfig& config = {});
  int num_modes() const { return static_cast<int>(mode_returns.size()); }
};

struct EpisodeScript {
  int initial_mode = 0;
  int final_mode = 0;
  double switch_phase = 0.5;
  int switch_clip = 0;
  int switch_step = 0;  // first control step commanded with final_mode
  int horizon = 200;
};

// Lower returns get higher probability; epsilon keeps every entry positive.
// Throws InvalidInput on an empty or non-finite input or a negative epsilon.
Eigen::VectorXd Returns2Prob(const Eigen::VectorXd& returns, double epsilon);

// round((clip + phase) * cycle_steps), ties to even.
int SwitchStep(int clip, double phase, int cycle_steps);

// Inverse-CDF draw from a probability vector.
int SampleIndex(const Eigen::VectorXd& probs, Rng& rng);

EpisodeScript SampleScript(const SamplerState& state, int cycle_steps,
                           int horizon, Rng& rng);
EpisodeScript UniformScript(int num_modes, int cycle_steps, int horizon,
                            Rng& rng);

// R_i[m_i] <- gamma_i R_i[m_i] + G and R_f[m_i][m_f] <- gamma_f R_f + G.
SamplerState UpdateRecords(SamplerState state, const EpisodeScript& script,
                           double episode_return);

void ValidateScript(const EpisodeScript& script, int num_modes);

Json SamplerConfigToJson(const SamplerConfig& cfg);
SamplerConfig SamplerConfigFromJson(const Json& j);
Json SamplerStateToJson(const SamplerState& state);
SamplerState SamplerStateFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_SAMPLER_H_
