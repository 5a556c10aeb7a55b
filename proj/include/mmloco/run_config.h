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

#ifndef MMLOCO_RUN_CONFIG_H_
#define MMLOCO_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmloco/io.h"
#include "mmloco/mode_encoder.h"
#include "mmloco/planner.h"
#include "mmloco/refmotion.h"
#include "mmloco/terrain.h"
#include "mmloco/trainer.h"

namespace mmloco {

struct EvalConfig {
  int rollouts = 4;    // per mode and per transition
  int horizon = 200;
};

// One self-describing run. Every sub-config seed follows `seed`.
struct RunConfig {
  // Builtin selector or path to a mode-set JSON file.
  std::string modeset = "pi2";
  double ref_dt = kDefaultRefDt;
  EncoderTrainConfig encoder;
  TrainConfig training;
  // Terrain for eval and plan; training always runs on flat ground.
  Terrain terrain;
  PlannerConfig planner;
  int planner_trials = 5;
  EvalConfig eval;
  std::uint64_t seed = 0;
  // Empty: the output root ($MMLOCO_OUT or the working directory).
  std::string output_dir;
  int workers = 1;

  void SetSeed(std::uint64_t s);
  void SetWorkers(int w);
  void Validate() const;
  std::uint64_t Hash() const;
};

// Named presets for the three training set-ups: pi1 (9 modes), pi2 and pi3
// (4 modes each). Also accepts "idle_walk".
RunConfig PresetConfig(std::string_view name);
std::vector<std::string> PresetNames();

// Human-readable differences between `cfg` and the preset of its builtin
// mode set (reward gains, sampler constants). Empty for custom mode sets.
std::vector<std::string> PresetDeviations(const RunConfig& cfg);

bool IsBuiltinModeset(std::string_view modeset);
std::vector<ModeDefinition> LoadModeDefinitions(const RunConfig& cfg);

// Output root: $MMLOCO_OUT if set, else ".".
std::filesystem::path OutputRoot();
std::filesystem::path OutputDir(const RunConfig& cfg);

Json EncoderTrainConfigToJson(const EncoderTrainConfig& cfg);
EncoderTrainConfig EncoderTrainConfigFromJson(const Json& j);

Json RunConfigToJson(const RunConfig& cfg);
// Relative file references (modeset, terrain) resolve against `base_dir`.
// Unknown keys are rejected.
RunConfig RunConfigFromJson(const Json& j,
                            const std::filesystem::path& base_dir = {});
// Reads a config file; a "preset" key selects the defaults that the rest of
// the file overrides.
RunConfig LoadRunConfig(const std::filesystem::path& path);

}  // namespace mmloco

#endif  // MMLOCO_RUN_CONFIG_H_
