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

#ifndef MMLOCO_COMMANDS_H_
#define MMLOCO_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mmloco/io.h"
#include "mmloco/policy.h"
#include "mmloco/refmotion.h"
#include "mmloco/rollout.h"
#include "mmloco/run_config.h"

namespace mmloco {

namespace fs = std::filesystem;

// Library file: {header, library}.
void GenRefs(const RunConfig& cfg, const fs::path& out, std::ostream& log);
ModeLibrary ReadLibraryFile(const fs::path& path);

struct EncoderPaths {
  fs::path library;      // input library file
  fs::path encoder;      // encoder model file
  fs::path library_out;  // library with latents (may equal `library`)
  fs::path loss_csv;     // epoch,loss,iterate_loss,learning_rate
};
void TrainEncoder(const RunConfig& cfg, const EncoderPaths& paths,
                  std::ostream& log);

struct PolicyPaths {
  fs::path library;
  fs::path policy;
  fs::path log_csv;
  fs::path checkpoint;   // empty: no checkpoints
  int checkpoint_every = 10;
  bool resume = false;   // continue from `checkpoint`
};
void TrainPolicy(const RunConfig& cfg, const PolicyPaths& paths,
                 std::ostream& log);

// Everything eval and plan need: the policy, the library it was trained on
// (with latents) and the training environment.
struct PolicyBundle {
  GaussianPolicy policy;
  ModeLibrary library;
  EnvConfig env;
  std::uint64_t config_hash = 0;
};
Json PolicyBundleToJson(const PolicyBundle& bundle);
PolicyBundle ReadPolicyFile(const fs::path& path);

struct EvalPaths {
  fs::path policy;
  fs::path report;
  fs::path trace_dir;  // empty: no traces
};
struct EvalOptions {
  double clock_rate = 1.0;
  bool use_config_terrain = false;
};
// Report: n mode and n^2 transition entries, MRA aggregates, mean heading
// velocity per mode. Returns the report document.
Json Eval(const RunConfig& cfg, const EvalPaths& paths,
          const EvalOptions& options, std::ostream& log);

struct PlanPaths {
  fs::path policy;
  fs::path plan;
  fs::path trace_csv;  // empty: no trace
};
// Plan file lists exactly `knots` entries.
Json Plan(const RunConfig& cfg, const PlanPaths& paths, std::ostream& log);

// Mean |z_a(t) - z_b(t)| over one clock cycle of deterministic rollouts in
// modes a and b, after one settling cycle.
double ModeDistinction(const GaussianPolicy& policy, const ModeLibrary& library,
                       int mode_a, int mode_b, const EnvConfig& env);

}  // namespace mmloco

#endif  // MMLOCO_COMMANDS_H_
