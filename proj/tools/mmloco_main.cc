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

// mmloco command-line driver.
//
// Exit codes: 0 success, 1 invalid input or config, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmloco/commands.h"
#include "mmloco/common.h"
#include "mmloco/run_config.h"

namespace {

using mmloco::RunConfig;
namespace fs = std::filesystem;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void AddCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Run config file (JSON)");
  cmd->add_option("--preset", o.preset,
                  "Preset config: pi1, pi2, pi3 or idle_walk");
  cmd->add_option("--seed", o.seed, "Seed for every random stream");
  cmd->add_option("--workers", o.workers, "Rollout worker threads");
}

RunConfig BaseConfig(const CommonOptions& o) {
  if (!o.config.empty() && !o.preset.empty()) {
    throw mmloco::InvalidInput("--config and --preset are exclusive");
  }
  RunConfig cfg;
  if (!o.config.empty()) {
    cfg = mmloco::LoadRunConfig(o.config);
  } else if (!o.preset.empty()) {
    cfg = mmloco::PresetConfig(o.preset);
  }
  if (o.seed) cfg.SetSeed(*o.seed);
  if (o.workers) cfg.SetWorkers(*o.workers);
  return cfg;
}

void Finalize(const RunConfig& cfg) {
  cfg.Validate();
  for (const auto& d : mmloco::PresetDeviations(cfg)) {
    std::cerr << "warning: " << d << "\n";
  }
}

fs::path OrDefault(const std::string& given, const RunConfig& cfg,
                   const char* name) {
  if (!given.empty()) return fs::path(given);
  return mmloco::OutputDir(cfg) / name;
}

mmloco::Terrain ReadTerrain(const std::string& path) {
  const mmloco::Json doc = mmloco::ReadJsonFile(path);
  return mmloco::TerrainFromJson(doc.contains("terrain") ? doc.at("terrain")
                                                         : doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmloco: multi-mode locomotion training and mode planning"};
  app.require_subcommand(1);
  CommonOptions common;

  // gen-refs
  auto* gen = app.add_subcommand("gen-refs", "Build a reference library");
  AddCommon(gen, common);
  std::string modeset, gen_out;
  std::optional<double> ref_dt;
  gen->add_option("--modeset", modeset,
                  "Builtin selector (pi1, pi2, pi3, idle_walk) or mode file");
  gen->add_option("--dt", ref_dt, "Sample period (s)");
  gen->add_option("--out", gen_out, "Library file [library.json]");

  // train-encoder
  auto* enc = app.add_subcommand("train-encoder",
                                 "Train the autoencoder and embed latents");
  AddCommon(enc, common);
  std::string enc_lib, enc_out, enc_lib_out, enc_loss;
  std::optional<int> epochs;
  std::optional<double> enc_lr;
  enc->add_option("--library", enc_lib, "Input library [library.json]");
  enc->add_option("--encoder-out", enc_out, "Encoder file [encoder.json]");
  enc->add_option("--library-out", enc_lib_out,
                  "Library with latents [same as --library]");
  enc->add_option("--loss-log", enc_loss, "Loss CSV [encoder_loss.csv]");
  enc->add_option("--epochs", epochs, "Training epochs");
  enc->add_option("--lr", enc_lr, "Adam learning rate");

  // train-policy
  auto* tp = app.add_subcommand("train-policy", "Train the multi-mode policy");
  AddCommon(tp, common);
  std::string tp_lib, tp_out, tp_log, tp_ck, sampler;
  int ck_every = 10;
  bool resume = false;
  std::optional<double> gamma_i, gamma_f, sampler_eps;
  std::optional<int> updates, episodes, horizon;
  tp->add_option("--library", tp_lib, "Library with latents [library.json]");
  tp->add_option("--out", tp_out, "Policy file [policy.json]");
  tp->add_option("--log", tp_log, "Training CSV [training_log.csv]");
  tp->add_option("--checkpoint", tp_ck, "Checkpoint file [checkpoint.json]");
  tp->add_option("--checkpoint-every", ck_every, "Updates between checkpoints");
  tp->add_flag("--resume", resume, "Continue from --checkpoint");
  tp->add_option("--sampler", sampler, "adaptive or uniform");
  tp->add_option("--gamma-i", gamma_i, "Decay of the per-mode records");
  tp->add_option("--gamma-f", gamma_f, "Decay of the per-transition records");
  tp->add_option("--epsilon", sampler_eps, "Sampling probability floor");
  tp->add_option("--updates", updates, "PPO updates");
  tp->add_option("--episodes", episodes, "Episodes per update");
  tp->add_option("--horizon", horizon, "Episode length (control steps)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate modes and transitions");
  AddCommon(ev, common);
  std::string ev_policy, ev_out, ev_traces, ev_terrain;
  double clock_rate = 1.0;
  std::optional<int> rollouts, ev_horizon;
  ev->add_option("--policy", ev_policy, "Policy file [policy.json]");
  ev->add_option("--out", ev_out, "Report file [eval_report.json]");
  ev->add_option("--trace-dir", ev_traces, "Per-mode trace CSVs [traces]");
  ev->add_option("--clock-rate", clock_rate, "Clock frequency multiplier");
  ev->add_option("--rollouts", rollouts, "Rollouts per mode and transition");
  ev->add_option("--horizon", ev_horizon, "Rollout length");
  ev->add_option("--terrain", ev_terrain, "Terrain file [flat]");

  // plan
  auto* pl = app.add_subcommand("plan", "Plan a mode sequence to a goal");
  AddCommon(pl, common);
  std::string pl_policy, pl_out, pl_trace, pl_terrain;
  std::optional<int> knots, pl_episodes, trials;
  std::optional<double> knot_dt, goal_x, goal_z, alpha, pl_eps;
  pl->add_option("--policy", pl_policy, "Policy file [policy.json]");
  pl->add_option("--terrain", pl_terrain, "Terrain file [config terrain]");
  pl->add_option("--knots", knots, "Number of knots k");
  pl->add_option("--dt", knot_dt, "Knot duration (s)");
  pl->add_option("--goal-x", goal_x, "Goal base x (m)");
  pl->add_option("--goal-z", goal_z, "Goal base z (m)");
  pl->add_option("--episodes", pl_episodes, "Q-learning episodes per trial");
  pl->add_option("--trials", trials, "Independent trials");
  pl->add_option("--alpha", alpha, "Q learning-rate floor");
  pl->add_option("--epsilon", pl_eps, "Exploration rate");
  pl->add_option("--out", pl_out, "Plan file [plan.json]");
  pl->add_option("--trace", pl_trace, "Trace CSV of the plan [plan_trace.csv]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    RunConfig cfg = BaseConfig(common);
    if (gen->parsed()) {
      if (!modeset.empty()) cfg.modeset = modeset;
      if (ref_dt) cfg.ref_dt = *ref_dt;
      Finalize(cfg);
      mmloco::GenRefs(cfg, OrDefault(gen_out, cfg, "library.json"), std::cout);
    } else if (enc->parsed()) {
      if (epochs) cfg.encoder.epochs = *epochs;
      if (enc_lr) cfg.encoder.learning_rate = *enc_lr;
      Finalize(cfg);
      mmloco::EncoderPaths paths;
      paths.library = OrDefault(enc_lib, cfg, "library.json");
      paths.encoder = OrDefault(enc_out, cfg, "encoder.json");
      paths.library_out =
          enc_lib_out.empty() ? paths.library : fs::path(enc_lib_out);
      paths.loss_csv = OrDefault(enc_loss, cfg, "encoder_loss.csv");
      mmloco::TrainEncoder(cfg, paths, std::cout);
    } else if (tp->parsed()) {
      auto& t = cfg.training;
      if (!sampler.empty()) t.sampler = mmloco::ParseSamplerKind(sampler);
      if (gamma_i) t.sampler_config.gamma_initial = *gamma_i;
      if (gamma_f) t.sampler_config.gamma_final = *gamma_f;
      if (sampler_eps) t.sampler_config.epsilon = *sampler_eps;
      if (updates) t.updates = *updates;
      if (episodes) t.episodes_per_update = *episodes;
      if (horizon) t.ppo.horizon = *horizon;
      Finalize(cfg);
      mmloco::PolicyPaths paths;
      paths.library = OrDefault(tp_lib, cfg, "library.json");
      paths.policy = OrDefault(tp_out, cfg, "policy.json");
      paths.log_csv = OrDefault(tp_log, cfg, "training_log.csv");
      paths.checkpoint = OrDefault(tp_ck, cfg, "checkpoint.json");
      paths.checkpoint_every = ck_every;
      paths.resume = resume;
      mmloco::TrainPolicy(cfg, paths, std::cout);
    } else if (ev->parsed()) {
      if (rollouts) cfg.eval.rollouts = *rollouts;
      if (ev_horizon) cfg.eval.horizon = *ev_horizon;
      mmloco::EvalOptions opts;
      opts.clock_rate = clock_rate;
      if (!ev_terrain.empty()) {
        cfg.terrain = ReadTerrain(ev_terrain);
        opts.use_config_terrain = true;
      }
      Finalize(cfg);
      mmloco::EvalPaths paths;
      paths.policy = OrDefault(ev_policy, cfg, "policy.json");
      paths.report = OrDefault(ev_out, cfg, "eval_report.json");
      paths.trace_dir = OrDefault(ev_traces, cfg, "traces");
      mmloco::Eval(cfg, paths, opts, std::cout);
    } else if (pl->parsed()) {
      auto& p = cfg.planner;
      if (!pl_terrain.empty()) cfg.terrain = ReadTerrain(pl_terrain);
      if (knots) p.knots = *knots;
      if (knot_dt) p.knot_dt = *knot_dt;
      if (goal_x) p.goal.x() = *goal_x;
      if (goal_z) p.goal.y() = *goal_z;
      if (pl_episodes) p.episodes = *pl_episodes;
      if (trials) cfg.planner_trials = *trials;
      if (alpha) p.alpha = *alpha;
      if (pl_eps) p.epsilon = *pl_eps;
      Finalize(cfg);
      mmloco::PlanPaths paths;
      paths.policy = OrDefault(pl_policy, cfg, "policy.json");
      paths.plan = OrDefault(pl_out, cfg, "plan.json");
      paths.trace_csv = OrDefault(pl_trace, cfg, "plan_trace.csv");
      mmloco::Plan(cfg, paths, std::cout);
    }
  } catch (const mmloco::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const mmloco::Json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
