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

#include "mmloco/commands.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mmloco/common.h"
#include "mmloco/mode_encoder.h"
#include "mmloco/planner.h"
#include "mmloco/trainer.h"

namespace mmloco {
namespace {

std::uint64_t HashJson(const Json& j) { return Fnv1a64(j.dump()); }

Json TrainIdentity(const TrainConfig& cfg) {
  Json j = TrainConfigToJson(cfg);
  j.erase("workers");
  return j;
}

// Writes through a temporary so an interrupted run never leaves a torn file.
void WriteJsonAtomically(const fs::path& path, const Json& doc) {
  fs::path tmp = path;
  tmp += ".tmp";
  WriteJsonFile(tmp, doc);
  fs::rename(tmp, path);
}

// Keeps the header lines and every row with update <= last_update.
// Fresh header (the update budget may have changed) plus the rows up to
// last_update.
std::string TruncatedLog(const fs::path& path, int last_update,
                         std::string header) {
  std::ifstream in(path);
  std::string line;
  std::string kept = std::move(header);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("update,", 0) == 0) {
      continue;
    }
    const int update = std::stoi(line.substr(0, line.find(',')));
    if (update <= last_update) kept += line + "\n";
  }
  return kept;
}

EpisodeScript SingleModeScript(int mode, int horizon) {
  EpisodeScript s;
  s.initial_mode = s.final_mode = mode;
  s.switch_step = 1;
  s.horizon = horizon;
  return s;
}

}  // namespace

void GenRefs(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto defs = LoadModeDefinitions(cfg);
  const ModeLibrary library = BuildLibrary(defs, cfg.ref_dt);
  Json hash_src = ModeDefinitionsToJson(defs);
  hash_src["dt"] = cfg.ref_dt;
  Json doc;
  doc["header"] = MakeHeader("library", HashJson(hash_src));
  doc["library"] = LibraryToJson(library);
  WriteJsonFile(out, doc);
  log << "wrote " << library.size() << " modes to " << out.string() << "\n";
}

ModeLibrary ReadLibraryFile(const fs::path& path) {
  const Json doc = ReadJsonFile(path);
  CheckHeader(doc, "library");
  return LibraryFromJson(doc.at("library"));
}

void TrainEncoder(const RunConfig& cfg, const EncoderPaths& paths,
                  std::ostream& log) {
  const Json lib_doc = ReadJsonFile(paths.library);
  CheckHeader(lib_doc, "library");
  const ModeLibrary library = LibraryFromJson(lib_doc.at("library"));
  Json hash_src = EncoderTrainConfigToJson(cfg.encoder);
  hash_src["library"] = lib_doc.at("header").at("config_hash");
  const std::uint64_t hash = HashJson(hash_src);

  const auto start = std::chrono::steady_clock::now();
  const EncoderTrainResult result = TrainAutoencoder(library, cfg.encoder);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();

  Json enc;
  enc["header"] = MakeHeader("encoder", hash);
  enc["config"] = EncoderTrainConfigToJson(cfg.encoder);
  enc["model"] = EncoderModelToJson(result.model);
  WriteJsonFile(paths.encoder, enc);

  Json lib_out;
  lib_out["header"] = MakeHeader("library", hash);
  lib_out["library"] = LibraryToJson(result.library);
  WriteJsonFile(paths.library_out, lib_out);

  if (!paths.loss_csv.empty()) {
    std::ostringstream csv;
    csv << CsvHeaderComment("encoder_loss", hash);
    csv << "epoch,loss,iterate_loss,learning_rate\n";
    csv << std::setprecision(12);
    for (size_t e = 0; e < result.loss_history.size(); ++e) {
      csv << e << ',' << result.loss_history[e] << ','
          << result.iterate_loss_history[e] << ','
          << result.learning_rate_history[e] << '\n';
    }
    WriteTextFile(paths.loss_csv, csv.str());
  }
  log << "encoder: " << cfg.encoder.epochs << " epochs, final loss "
      << result.final_loss << " (" << std::fixed << std::setprecision(1)
      << secs << " s)\n"
      << std::defaultfloat;
}

Json PolicyBundleToJson(const PolicyBundle& bundle) {
  Json j;
  j["header"] = MakeHeader("policy", bundle.config_hash);
  j["policy"] = PolicyToJson(bundle.policy);
  j["library"] = LibraryToJson(bundle.library);
  j["env"] = EnvConfigToJson(bundle.env);
  return j;
}

PolicyBundle ReadPolicyFile(const fs::path& path) {
  const Json doc = ReadJsonFile(path);
  CheckHeader(doc, "policy");
  PolicyBundle b;
  b.policy = PolicyFromJson(doc.at("policy"));
  b.library = LibraryFromJson(doc.at("library"));
  b.env = EnvConfigFromJson(doc.at("env"));
  b.config_hash = std::stoull(
      doc.at("header").at("config_hash").get<std::string>(), nullptr, 16);
  if (!b.library.has_latents() ||
      b.policy.obs_dim() != 2 + b.library.latent_dim() + kStateObsDim) {
    throw InvalidInput("policy file library does not match the policy input");
  }
  return b;
}

void TrainPolicy(const RunConfig& cfg, const PolicyPaths& paths,
                 std::ostream& log) {
  const Json lib_doc = ReadJsonFile(paths.library);
  CheckHeader(lib_doc, "library");
  const ModeLibrary library = LibraryFromJson(lib_doc.at("library"));
  if (!library.has_latents()) {
    throw InvalidInput("library has no latents; run train-encoder first");
  }
  const TrainConfig& tc = cfg.training;
  Json identity = TrainIdentity(tc);
  identity["library"] = lib_doc.at("header").at("config_hash");
  const std::uint64_t hash = HashJson(identity);

  TrainState state;
  std::string log_text;
  if (paths.resume) {
    if (paths.checkpoint.empty()) {
      throw InvalidInput("--resume needs a checkpoint path");
    }
    const Json ck = ReadJsonFile(paths.checkpoint);
    CheckHeader(ck, "checkpoint");
    // The update budget may grow between runs; nothing else may change.
    Json saved = ck.at("identity");
    Json now = identity;
    saved["updates"] = now["updates"] = 0;
    if (saved != now) {
      throw InvalidInput("checkpoint was written with a different training "
                         "config or library");
    }
    state = TrainStateFromJson(ck.at("state"));
    if (!paths.log_csv.empty() && fs::exists(paths.log_csv)) {
      log_text = TruncatedLog(paths.log_csv, state.update,
                              TrainingLogCsvHeader(library.size(), hash));
    }
    log << "resuming at update " << state.update << "\n";
  } else {
    state = InitTraining(tc, library);
  }
  if (log_text.empty()) log_text = TrainingLogCsvHeader(library.size(), hash);

  std::ofstream csv;
  if (!paths.log_csv.empty()) {
    WriteTextFile(paths.log_csv, log_text);
    csv.open(paths.log_csv, std::ios::app);
  }
  auto save_checkpoint = [&](const TrainState& s) {
    Json ck;
    ck["header"] = MakeHeader("checkpoint", hash);
    ck["identity"] = identity;
    ck["state"] = TrainStateToJson(s);
    WriteJsonAtomically(paths.checkpoint, ck);
  };

  const int remaining = std::max(0, tc.updates - state.update);
  std::vector<UpdateLogRow> rows;
  TrainUpdates(state, tc, library, remaining, &rows,
               [&](const TrainState& s) {
                 const UpdateLogRow& row = rows.back();
                 if (csv.is_open()) csv << TrainingLogCsvRow(row) << std::flush;
                 if (s.update % 10 == 0 || s.update == tc.updates) {
                   log << "update " << s.update << "/" << tc.updates
                       << "  mean normalized return "
                       << row.mean_normalized_return << "\n";
                 }
                 if (!paths.checkpoint.empty() && paths.checkpoint_every > 0 &&
                     s.update % paths.checkpoint_every == 0) {
                   save_checkpoint(s);
                 }
               });
  if (!paths.checkpoint.empty()) save_checkpoint(state);

  PolicyBundle bundle;
  bundle.policy = state.learner.policy;
  bundle.library = library;
  bundle.env = tc.env;
  bundle.config_hash = hash;
  WriteJsonFile(paths.policy, PolicyBundleToJson(bundle));
  log << "wrote policy to " << paths.policy.string() << "\n";
}

double ModeDistinction(const GaussianPolicy& policy, const ModeLibrary& library,
                       int mode_a, int mode_b, const EnvConfig& env) {
  const int cycle = env.robot.cycle_steps();
  EnvConfig quiet = env;
  quiet.init_noise = 0.0;
  std::vector<TraceRow> ta, tb;
  Rng rng(0);
  Rollout(policy, nullptr, library, SingleModeScript(mode_a, 2 * cycle), quiet,
          false, rng, &ta);
  Rollout(policy, nullptr, library, SingleModeScript(mode_b, 2 * cycle), quiet,
          false, rng, &tb);
  double sum = 0.0;
  int n = 0;
  for (int t = cycle; t < 2 * cycle; ++t) {
    // A fallen rollout keeps its last height.
    const auto& ra = ta[std::min<size_t>(t, ta.size() - 1)];
    const auto& rb = tb[std::min<size_t>(t, tb.size() - 1)];
    sum += std::abs(ra.q[kBaseZ] - rb.q[kBaseZ]);
    ++n;
  }
  return sum / n;
}

Json Eval(const RunConfig& cfg, const EvalPaths& paths,
          const EvalOptions& options, std::ostream& log) {
  const PolicyBundle b = ReadPolicyFile(paths.policy);
  EnvConfig env = b.env;
  if (!(options.clock_rate > 0.0)) {
    throw InvalidInput("clock rate must be positive");
  }
  env.clock_rate = options.clock_rate;
  if (options.use_config_terrain) env.terrain = cfg.terrain;

  const ModeEvaluation ev =
      EvaluateModes(b.policy, b.library, env, cfg.eval.horizon,
                    cfg.eval.rollouts, cfg.seed, cfg.workers);
  const auto names = b.library.names();
  const int n = b.library.size();

  Json hash_src;
  hash_src["policy"] = HexDigest(b.config_hash);
  hash_src["eval"] = RunConfigToJson(cfg).at("eval");
  hash_src["seed"] = cfg.seed;
  hash_src["clock_rate"] = options.clock_rate;
  hash_src["terrain"] = TerrainToJson(env.terrain);
  const std::uint64_t hash = HashJson(hash_src);

  Json report;
  report["header"] = MakeHeader("eval_report", hash);
  report["clock_rate"] = options.clock_rate;
  report["horizon"] = cfg.eval.horizon;
  report["rollouts"] = cfg.eval.rollouts;
  report["mode_names"] = names;
  Json modes = Json::object();
  Json velocity = Json::object();
  for (int i = 0; i < n; ++i) {
    modes[names[i]] = ev.modes[i];
    velocity[names[i]] =
        MeanHeadingVelocity(b.policy, b.library, i, env, cfg.eval.horizon);
  }
  report["modes"] = modes;
  Json rows = Json::array();
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n);
    for (int f = 0; f < n; ++f) row[f] = ev.transitions(i, f);
    rows.push_back(row);
  }
  report["transitions"] = rows;
  report["mra_modes"] = ev.mra_modes();
  report["mra_transitions"] = ev.mra_transitions();
  report["heading_velocity"] = velocity;
  WriteJsonFile(paths.report, report);

  if (!paths.trace_dir.empty()) {
    EnvConfig quiet = env;
    quiet.init_noise = 0.0;
    for (int i = 0; i < n; ++i) {
      std::vector<TraceRow> trace;
      Rng rng(cfg.seed);
      Rollout(b.policy, nullptr, b.library,
              SingleModeScript(i, cfg.eval.horizon), quiet, false, rng, &trace);
      WriteTextFile(paths.trace_dir / (names[i] + ".csv"),
                    TraceCsv(trace, names, hash));
    }
  }
  log << "MRA modes " << ev.mra_modes() << ", transitions "
      << ev.mra_transitions() << "\n";
  for (int i = 0; i < n; ++i) {
    log << "  " << names[i] << ": " << ev.modes[i] << "\n";
  }
  return report;
}

Json Plan(const RunConfig& cfg, const PlanPaths& paths, std::ostream& log) {
  const PolicyBundle b = ReadPolicyFile(paths.policy);
  EnvConfig env = b.env;
  env.terrain = cfg.terrain;
  const PlannerConfig& pc = cfg.planner;
  const PlanEvaluator evaluate = [&](const ModePlan& plan) {
    return PlanRollout(plan, b.policy, b.library, env, pc);
  };
  const TrialsResult tr = ParallelTrials(evaluate, b.library.size(), pc,
                                         cfg.planner_trials, cfg.workers);
  const auto names = b.library.names();

  Json hash_src;
  hash_src["policy"] = HexDigest(b.config_hash);
  hash_src["planner"] = HexDigest(pc.Hash());
  hash_src["trials"] = cfg.planner_trials;
  hash_src["terrain"] = TerrainToJson(env.terrain);
  const std::uint64_t hash = HashJson(hash_src);

  Json doc;
  doc["header"] = MakeHeader("plan", hash);
  doc["header"]["knots"] = pc.knots;
  doc["header"]["knot_dt"] = pc.knot_dt;
  doc["header"]["goal"] = {pc.goal.x(), pc.goal.y()};
  const Json body = PlanToJson(tr.plan, pc, names);
  doc["planner"] = body.at("planner");
  doc["terrain"] = TerrainToJson(env.terrain);
  doc["trials"] = cfg.planner_trials;
  doc["best_trial"] = tr.best_trial;
  doc["plan_return"] = tr.plan_return;
  std::vector<double> trial_returns;
  double solve_seconds = 0.0;
  for (const auto& t : tr.trials) {
    trial_returns.push_back(t.plan_return);
    solve_seconds += t.solve_seconds;
  }
  doc["trial_returns"] = trial_returns;
  doc["knots"] = body.at("knots");
  WriteJsonFile(paths.plan, doc);

  if (!paths.trace_csv.empty()) {
    std::vector<TraceRow> trace;
    PlanRollout(tr.plan, b.policy, b.library, env, pc, &trace);
    WriteTextFile(paths.trace_csv, TraceCsv(trace, names, hash));
  }
  log << "plan (return " << tr.plan_return << ", " << solve_seconds
      << " s of Q-learning):";
  for (int m : tr.plan.modes) log << " " << names[m];
  log << "\n";
  return doc;
}

}  // namespace mmloco
