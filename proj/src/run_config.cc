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

#include "mmloco/run_config.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "mmloco/common.h"

namespace mmloco {
namespace {

constexpr double kPresetGamma = 0.4;
constexpr double kPresetEpsilon = 0.2;

Eigen::Vector3d PresetWeights(std::string_view modeset) {
  if (modeset == "pi3") return {0.35, 0.35, 0.3};
  return {0.5, 0.5, 0.0};
}

std::filesystem::path Resolve(const std::string& ref,
                              const std::filesystem::path& base_dir) {
  std::filesystem::path p(ref);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

void RequireFile(const std::filesystem::path& p, std::string_view what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw InvalidInput(std::string(what) + " file '" + p.string() +
                       "' does not exist");
  }
}

}  // namespace

void RunConfig::SetSeed(std::uint64_t s) {
  seed = s;
  encoder.seed = s;
  training.seed = s;
  planner.seed = s;
}

void RunConfig::SetWorkers(int w) {
  workers = w;
  training.workers = w;
}

void RunConfig::Validate() const {
  if (!IsBuiltinModeset(modeset) &&
      !std::filesystem::is_regular_file(modeset)) {
    std::string valid;
    for (const auto& n : BuiltinSelectors()) {
      valid += (valid.empty() ? "" : ", ") + n;
    }
    throw InvalidInput("unknown mode set '" + modeset +
                       "': expected one of " + valid +
                       " or a mode-set file");
  }
  if (!(ref_dt > 0.0) || !std::isfinite(ref_dt)) {
    throw InvalidInput("ref_dt must be positive");
  }
  if (!(encoder.learning_rate > 0.0) || encoder.epochs < 0 ||
      encoder.hidden_size < 1 || encoder.latent_dim < 1) {
    throw InvalidInput(
        "encoder needs lr > 0, epochs >= 0, hidden and latent sizes >= 1");
  }
  const Eigen::Vector3d& w = training.env.reward.weights;
  if (!w.allFinite() || (w.array() < 0.0).any() || w.sum() <= 0.0) {
    throw InvalidInput("reward weights must be 3 finite non-negative values "
                       "with a positive sum");
  }
  if (!training.env.reward.sensitivity.allFinite() ||
      (training.env.reward.sensitivity.array() < 0.0).any()) {
    throw InvalidInput("reward sensitivities must be finite and >= 0");
  }
  training.Validate();
  planner.Validate();
  if (planner_trials < 1) throw InvalidInput("planner_trials must be >= 1");
  if (eval.rollouts < 1 || eval.horizon < 1) {
    throw InvalidInput("eval rollouts and horizon must be >= 1");
  }
  if (workers < 1) throw InvalidInput("workers must be >= 1");
}

std::uint64_t RunConfig::Hash() const {
  // Worker count and output location do not change results.
  Json j = RunConfigToJson(*this);
  j.erase("workers");
  j.erase("output_dir");
  j["training"].erase("workers");
  return Fnv1a64(j.dump());
}

std::vector<std::string> PresetNames() {
  return {"pi1", "pi2", "pi3", "idle_walk"};
}

RunConfig PresetConfig(std::string_view name) {
  const auto names = PresetNames();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw InvalidInput("unknown preset '" + std::string(name) +
                       "' (valid: " + valid + ")");
  }
  RunConfig c;
  c.modeset = std::string(name);
  c.training.env.reward.weights = PresetWeights(name);
  c.training.sampler = SamplerKind::kAdaptive;
  c.training.sampler_config.gamma_initial = kPresetGamma;
  c.training.sampler_config.gamma_final = kPresetGamma;
  c.training.sampler_config.epsilon = kPresetEpsilon;
  if (name == "pi1") c.training.updates = 400;
  return c;
}

std::vector<std::string> PresetDeviations(const RunConfig& cfg) {
  std::vector<std::string> out;
  if (!IsBuiltinModeset(cfg.modeset)) return out;
  const Eigen::Vector3d w = PresetWeights(cfg.modeset);
  if (!cfg.training.env.reward.weights.isApprox(w, 1e-12)) {
    out.push_back("reward weights differ from the " + cfg.modeset +
                  " preset [" + std::to_string(w[0]) + ", " +
                  std::to_string(w[1]) + ", " + std::to_string(w[2]) + "]");
  }
  const SamplerConfig& s = cfg.training.sampler_config;
  const auto is_grid = [](double g) {
    return g == 0.2 || g == 0.4 || g == 0.8;
  };
  if (!is_grid(s.gamma_initial) || !is_grid(s.gamma_final)) {
    out.push_back("sampler decay outside the {0.2, 0.4, 0.8} grid");
  }
  if (s.epsilon != kPresetEpsilon) {
    out.push_back("sampler epsilon differs from the preset 0.2");
  }
  return out;
}

bool IsBuiltinModeset(std::string_view modeset) {
  const auto names = BuiltinSelectors();
  return std::find(names.begin(), names.end(), modeset) != names.end();
}

std::vector<ModeDefinition> LoadModeDefinitions(const RunConfig& cfg) {
  if (IsBuiltinModeset(cfg.modeset)) {
    return BuiltinModeDefinitions(cfg.modeset);
  }
  if (!std::filesystem::is_regular_file(cfg.modeset)) {
    std::string valid;
    for (const auto& s : BuiltinSelectors()) {
      valid += (valid.empty() ? "" : ", ") + s;
    }
    throw InvalidInput("unknown mode set '" + cfg.modeset +
                       "': not a file and not a builtin (valid: " + valid +
                       ")");
  }
  return ModeDefinitionsFromJson(ReadJsonFile(cfg.modeset));
}

std::filesystem::path OutputRoot() {
  const char* env = std::getenv("MMLOCO_OUT");
  if (env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::filesystem::path(".");
}

std::filesystem::path OutputDir(const RunConfig& cfg) {
  if (cfg.output_dir.empty()) return OutputRoot();
  std::filesystem::path p(cfg.output_dir);
  return p.is_absolute() ? p : OutputRoot() / p;
}

Json EncoderTrainConfigToJson(const EncoderTrainConfig& cfg) {
  return Json{{"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"strict_monotone", cfg.strict_monotone},
              {"hidden_size", cfg.hidden_size},
              {"latent_dim", cfg.latent_dim},
              {"seed", cfg.seed}};
}

EncoderTrainConfig EncoderTrainConfigFromJson(const Json& j) {
  EncoderTrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.strict_monotone = j.value("strict_monotone", c.strict_monotone);
  c.hidden_size = j.value("hidden_size", c.hidden_size);
  c.latent_dim = j.value("latent_dim", c.latent_dim);
  c.seed = j.value("seed", c.seed);
  return c;
}

Json RunConfigToJson(const RunConfig& cfg) {
  Json j;
  j["modeset"] = cfg.modeset;
  j["ref_dt"] = cfg.ref_dt;
  j["encoder"] = EncoderTrainConfigToJson(cfg.encoder);
  j["training"] = TrainConfigToJson(cfg.training);
  j["terrain"] = TerrainToJson(cfg.terrain);
  j["planner"] = PlannerConfigToJson(cfg.planner);
  j["planner_trials"] = cfg.planner_trials;
  j["eval"] = Json{{"rollouts", cfg.eval.rollouts},
                   {"horizon", cfg.eval.horizon}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

RunConfig RunConfigFromJson(const Json& j,
                            const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "preset",  "modeset", "ref_dt",         "encoder", "training",
      "terrain", "planner", "planner_trials", "eval",    "seed",
      "output_dir", "workers", "header"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw InvalidInput("unknown config key '" + key + "'");
  }
  try {
    RunConfig c = j.contains("preset")
                      ? PresetConfig(j.at("preset").get<std::string>())
                      : RunConfig{};
    if (j.contains("modeset")) {
      c.modeset = j.at("modeset").get<std::string>();
      if (!IsBuiltinModeset(c.modeset)) {
        c.modeset = Resolve(c.modeset, base_dir).string();
      }
    }
    c.ref_dt = j.value("ref_dt", c.ref_dt);
    if (j.contains("encoder")) {
      c.encoder = EncoderTrainConfigFromJson(j.at("encoder"));
    }
    if (j.contains("training")) {
      // Merge so a config can override single training fields.
      Json t = TrainConfigToJson(c.training);
      t.merge_patch(j.at("training"));
      c.training = TrainConfigFromJson(t);
    }
    if (j.contains("terrain")) {
      const Json& t = j.at("terrain");
      if (t.is_string()) {
        const auto p = Resolve(t.get<std::string>(), base_dir);
        RequireFile(p, "terrain");
        const Json doc = ReadJsonFile(p);
        c.terrain = TerrainFromJson(doc.contains("terrain") ? doc.at("terrain")
                                                            : doc);
      } else {
        c.terrain = TerrainFromJson(t);
      }
    }
    if (j.contains("planner")) {
      Json p = PlannerConfigToJson(c.planner);
      p.merge_patch(j.at("planner"));
      c.planner = PlannerConfigFromJson(p);
    }
    c.planner_trials = j.value("planner_trials", c.planner_trials);
    if (j.contains("eval")) {
      c.eval.rollouts = j.at("eval").value("rollouts", c.eval.rollouts);
      c.eval.horizon = j.at("eval").value("horizon", c.eval.horizon);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.SetSeed(j.value("seed", c.seed));
    c.SetWorkers(j.value("workers", c.workers));
    c.Validate();
    return c;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed config: ") + e.what());
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  RequireFile(path, "config");
  return RunConfigFromJson(ReadJsonFile(path), path.parent_path());
}

}  // namespace mmloco
