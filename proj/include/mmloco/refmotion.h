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

#ifndef MMLOCO_REFMOTION_H_
#define MMLOCO_REFMOTION_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mmloco/io.h"

namespace mmloco {

// Column layout of ReferenceMotion::samples.
enum RefChannel : int {
  kRefDx = 0,         // per-step base displacement along heading (m)
  kRefZ = 1,          // base height above the support plane (m)
  kRefPitch = 2,      // base pitch (rad)
  kRefContactL = 3,   // {0, 1}
  kRefContactR = 4,   // {0, 1}
};
inline constexpr int kRefChannels = 5;

inline constexpr double kDefaultRefDt = 0.02;
inline constexpr double kNominalBaseHeight = 0.5;

enum class MotionKind { kPeriodic, kTransient, kSteadyState };

std::string_view MotionKindName(MotionKind kind);
MotionKind ParseMotionKind(std::string_view name);

// Planar base keyframe.
struct Keyframe {
  double time = 0.0;
  double base_x = 0.0;
  double base_z = kNominalBaseHeight;
  double base_pitch = 0.0;
};

// Contact state over [start_phase, end_phase) of a clip.
struct ContactPhase {
  double start_phase = 0.0;
  double end_phase = 1.0;
  bool left = false;
  bool right = false;
};

struct ReferenceMotion {
  std::string name;
  // T x kRefChannels. Row 0 has dx = 0: sample i sits at clip time i*dt and
  // dx[i] = x(i*dt) - x((i-1)*dt).
  Eigen::MatrixXd samples;
  double dt = kDefaultRefDt;
  MotionKind kind = MotionKind::kPeriodic;
  // False when no contact schedule was attached; the contact channels are
  // then zero and carry no tracking target.
  bool has_contacts = false;

  int length() const { return static_cast<int>(samples.rows()); }
  double clip_duration() const { return dt * (length() - 1); }
  // Sum of dx over one clip.
  double clip_displacement() const;
  // Absolute x of every sample relative to sample 0.
  Eigen::VectorXd positions() const;
};

// The n_m-dimensional encoding of one reference motion.
struct LatentMode {
  Eigen::VectorXd z;
  std::string source_name;
};

struct ModeEntry {
  ReferenceMotion motion;
  std::optional<LatentMode> latent;
};

// Ordered set of modes. The order defines the mode indices used by the
// sampler, the policy trainer and the planner.
class ModeLibrary {
 public:
  ModeLibrary() = default;

  void Add(ReferenceMotion motion, std::optional<LatentMode> latent = {});

  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const ModeEntry& entry(int index) const { return entries_.at(index); }
  const ReferenceMotion& motion(int index) const {
    return entries_.at(index).motion;
  }
  const std::vector<ModeEntry>& entries() const { return entries_; }

  // Throws InvalidInput when any mode lacks a latent.
  const LatentMode& latent(int index) const;
  bool has_latents() const;
  int latent_dim() const;
  void SetLatent(int index, LatentMode latent);

  // -1 when absent.
  int IndexOf(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<ModeEntry> entries_;
};

// Human-authored mode description (the mode-set file schema).
struct ModeDefinition {
  std::string name;
  MotionKind kind = MotionKind::kPeriodic;
  std::vector<Keyframe> keyframes;
  std::vector<ContactPhase> contacts;  // empty: no contact reference
};

// Samples keyframes at uniform dt, linear between bracketing keyframes.
// Throws InvalidInput on fewer than two keyframes, non-increasing times or
// a span shorter than dt.
ReferenceMotion InterpolateKeyframes(std::span<const Keyframe> keyframes,
                                     double dt);

// Fills the contact channels. Phases must tile [0, 1] in order. For periodic
// motions the final sample (phase 1) wraps onto phase 0.
ReferenceMotion ApplyContactSchedule(ReferenceMotion motion,
                                     std::span<const ContactPhase> phases);

ReferenceMotion BuildMotion(const ModeDefinition& def, double dt);
ModeLibrary BuildLibrary(std::span<const ModeDefinition> defs, double dt);

// Selectors "pi1", "pi2", "pi3" and "idle_walk".
std::vector<std::string> BuiltinSelectors();
std::vector<ModeDefinition> BuiltinModeDefinitions(std::string_view selector);
ModeLibrary BuiltinLibrary(std::string_view selector,
                           double dt = kDefaultRefDt);

// Mode-set definition files: {"dt": ..., "modes": [ModeDefinition...]}.
std::vector<ModeDefinition> ModeDefinitionsFromJson(const Json& doc);
Json ModeDefinitionsToJson(std::span<const ModeDefinition> defs);

// Library files carry samples and latents field for field.
Json LibraryToJson(const ModeLibrary& library);
ModeLibrary LibraryFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_REFMOTION_H_
