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

#include "mmloco/refmotion.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mmloco/common.h"

namespace mmloco {
namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kPhaseEps = 1e-12;

// Straight-line modes: base height constant, pitch zero, x advancing at
// `speed` over a one-second clip.
ModeDefinition Stride(std::string name, double speed) {
  ModeDefinition def;
  def.name = std::move(name);
  def.kind = MotionKind::kPeriodic;
  def.keyframes = {{0.0, 0.0, kNominalBaseHeight, 0.0},
                   {1.0, speed, kNominalBaseHeight, 0.0}};
  return def;
}

// Crouch, push off into a pitched-down flight, land.
ModeDefinition Leap(std::string name, double speed) {
  ModeDefinition def;
  def.name = std::move(name);
  def.kind = MotionKind::kPeriodic;
  def.keyframes = {{0.0, 0.0, kNominalBaseHeight, 0.0},
                   {0.3, 0.3 * speed, 0.45, 0.1},
                   {0.55, 0.55 * speed, 0.62, -0.1},
                   {0.8, 0.8 * speed, kNominalBaseHeight, 0.0},
                   {1.0, speed, kNominalBaseHeight, 0.0}};
  return def;
}

ModeDefinition Idle() {
  ModeDefinition def;
  def.name = "idle";
  def.kind = MotionKind::kSteadyState;
  def.keyframes = {{0.0, 0.0, kNominalBaseHeight, 0.0},
                   {1.0, 0.0, kNominalBaseHeight, 0.0}};
  return def;
}

ModeDefinition Launch() {
  ModeDefinition def;
  def.name = "launch";
  def.kind = MotionKind::kTransient;
  def.keyframes = {{0.0, 0.0, kNominalBaseHeight, 0.0},
                   {0.3, 0.05, 0.42, 0.1},
                   {0.6, 0.35, 0.85, -0.1},
                   {1.0, 0.6, kNominalBaseHeight, 0.0}};
  return def;
}

Json KeyframeToJson(const Keyframe& k) {
  return Json{{"t", k.time}, {"x", k.base_x}, {"z", k.base_z},
              {"pitch", k.base_pitch}};
}

Json PhaseToJson(const ContactPhase& p) {
  return Json{{"start", p.start_phase}, {"end", p.end_phase},
              {"left", p.left}, {"right", p.right}};
}

}  // namespace

std::string_view MotionKindName(MotionKind kind) {
  switch (kind) {
    case MotionKind::kPeriodic:
      return "periodic";
    case MotionKind::kTransient:
      return "transient";
    case MotionKind::kSteadyState:
      return "steady_state";
  }
  return "periodic";
}

MotionKind ParseMotionKind(std::string_view name) {
  if (name == "periodic") return MotionKind::kPeriodic;
  if (name == "transient") return MotionKind::kTransient;
  if (name == "steady_state") return MotionKind::kSteadyState;
  throw InvalidInput("unknown motion kind '" + std::string(name) +
                     "' (valid: periodic, transient, steady_state)");
}

double ReferenceMotion::clip_displacement() const {
  return samples.col(kRefDx).sum();
}

Eigen::VectorXd ReferenceMotion::positions() const {
  Eigen::VectorXd x(length());
  double acc = 0.0;
  for (int i = 0; i < length(); ++i) {
    acc += samples(i, kRefDx);
    x[i] = acc;
  }
  return x;
}

void ModeLibrary::Add(ReferenceMotion motion, std::optional<LatentMode> latent) {
  if (IndexOf(motion.name) >= 0) {
    throw InvalidInput("duplicate mode name '" + motion.name + "'");
  }
  entries_.push_back({std::move(motion), std::move(latent)});
}

const LatentMode& ModeLibrary::latent(int index) const {
  const auto& e = entries_.at(index);
  if (!e.latent) {
    throw InvalidInput("mode '" + e.motion.name +
                       "' has no latent; run train-encoder first");
  }
  return *e.latent;
}

bool ModeLibrary::has_latents() const {
  return !entries_.empty() &&
         std::all_of(entries_.begin(), entries_.end(),
                     [](const ModeEntry& e) { return e.latent.has_value(); });
}

int ModeLibrary::latent_dim() const {
  return has_latents() ? static_cast<int>(entries_.front().latent->z.size())
                       : 0;
}

void ModeLibrary::SetLatent(int index, LatentMode latent) {
  entries_.at(index).latent = std::move(latent);
}

int ModeLibrary::IndexOf(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[i].motion.name == name) return i;
  }
  return -1;
}

std::vector<std::string> ModeLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.motion.name);
  return out;
}

ReferenceMotion InterpolateKeyframes(std::span<const Keyframe> keyframes,
                                     double dt) {
  if (keyframes.size() < 2) {
    throw InvalidInput("need at least two keyframes");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("dt must be positive");
  }
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const Keyframe& k = keyframes[i];
    if (!std::isfinite(k.time) || !std::isfinite(k.base_x) ||
        !std::isfinite(k.base_z) || !std::isfinite(k.base_pitch)) {
      throw InvalidInput("keyframe values must be finite");
    }
    if (k.time < 0.0) throw InvalidInput("keyframe time must be >= 0");
    if (i > 0 && !(k.time > keyframes[i - 1].time)) {
      throw InvalidInput("keyframe times must be strictly increasing");
    }
  }
  const double t0 = keyframes.front().time;
  const double span = keyframes.back().time - t0;
  const int steps = static_cast<int>(std::floor(span / dt + kTimeEps));
  if (steps < 1) throw InvalidInput("keyframe span shorter than dt");

  ReferenceMotion motion;
  motion.dt = dt;
  motion.samples = Eigen::MatrixXd::Zero(steps + 1, kRefChannels);
  std::size_t seg = 0;
  double prev_x = keyframes.front().base_x;
  for (int i = 0; i <= steps; ++i) {
    const double t = std::min(t0 + i * dt, keyframes.back().time);
    while (seg + 2 < keyframes.size() && t > keyframes[seg + 1].time) ++seg;
    const Keyframe& a = keyframes[seg];
    const Keyframe& b = keyframes[seg + 1];
    double x, z, pitch;
    if (t == a.time) {
      x = a.base_x, z = a.base_z, pitch = a.base_pitch;
    } else if (t == b.time) {
      x = b.base_x, z = b.base_z, pitch = b.base_pitch;
    } else {
      const double s = (t - a.time) / (b.time - a.time);
      x = a.base_x + s * (b.base_x - a.base_x);
      z = a.base_z + s * (b.base_z - a.base_z);
      pitch = a.base_pitch + s * (b.base_pitch - a.base_pitch);
    }
    motion.samples(i, kRefDx) = i == 0 ? 0.0 : x - prev_x;
    motion.samples(i, kRefZ) = z;
    motion.samples(i, kRefPitch) = pitch;
    prev_x = x;
  }
  return motion;
}

ReferenceMotion ApplyContactSchedule(ReferenceMotion motion,
                                     std::span<const ContactPhase> phases) {
  if (phases.empty()) throw InvalidInput("empty contact schedule");
  double expected_start = 0.0;
  for (const ContactPhase& p : phases) {
    if (std::abs(p.start_phase - expected_start) > kPhaseEps) {
      throw InvalidInput(p.start_phase < expected_start
                             ? "contact phases overlap"
                             : "contact phases leave a gap");
    }
    if (!(p.end_phase > p.start_phase) || p.end_phase > 1.0 + kPhaseEps) {
      throw InvalidInput("contact phase must satisfy start < end <= 1");
    }
    expected_start = p.end_phase;
  }
  if (std::abs(expected_start - 1.0) > kPhaseEps) {
    throw InvalidInput("contact phases must cover [0, 1]");
  }

  const int T = motion.length();
  for (int i = 0; i < T; ++i) {
    double phase = static_cast<double>(i) / (T - 1);
    if (motion.kind == MotionKind::kPeriodic && i == T - 1) phase = 0.0;
    const ContactPhase* active = &phases.back();
    for (const ContactPhase& p : phases) {
      if (phase >= p.start_phase && phase < p.end_phase) {
        active = &p;
        break;
      }
    }
    motion.samples(i, kRefContactL) = active->left ? 1.0 : 0.0;
    motion.samples(i, kRefContactR) = active->right ? 1.0 : 0.0;
  }
  motion.has_contacts = true;
  return motion;
}

ReferenceMotion BuildMotion(const ModeDefinition& def, double dt) {
  if (def.name.empty()) throw InvalidInput("mode name must not be empty");
  ReferenceMotion motion = InterpolateKeyframes(def.keyframes, dt);
  motion.name = def.name;
  motion.kind = def.kind;
  if (def.kind == MotionKind::kPeriodic) {
    const auto& first = def.keyframes.front();
    const auto& last = def.keyframes.back();
    if (std::abs(first.base_z - last.base_z) > 1e-9 ||
        std::abs(first.base_pitch - last.base_pitch) > 1e-9) {
      throw InvalidInput("periodic mode '" + def.name +
                         "' must start and end at the same z and pitch");
    }
  }
  if (!def.contacts.empty()) {
    motion = ApplyContactSchedule(std::move(motion), def.contacts);
  }
  return motion;
}

ModeLibrary BuildLibrary(std::span<const ModeDefinition> defs, double dt) {
  if (defs.empty()) throw InvalidInput("mode set is empty");
  ModeLibrary library;
  for (const auto& def : defs) library.Add(BuildMotion(def, dt));
  return library;
}

std::vector<std::string> BuiltinSelectors() {
  return {"pi1", "pi2", "pi3", "idle_walk"};
}

std::vector<ModeDefinition> BuiltinModeDefinitions(std::string_view selector) {
  // Lateral directions of the 3-D robot become backward variants in the
  // plane: l at half and r at one and a half times the nominal speed.
  constexpr double kSpeed = 0.5;
  if (selector == "pi1") {
    return {Idle(),
            Stride("walk_f", kSpeed),
            Stride("walk_b", -kSpeed),
            Stride("walk_l", -0.5 * kSpeed),
            Stride("walk_r", -1.5 * kSpeed),
            Leap("leap_f", kSpeed),
            Leap("leap_b", -kSpeed),
            Leap("leap_l", -0.5 * kSpeed),
            Leap("leap_r", -1.5 * kSpeed)};
  }
  if (selector == "pi2") {
    return {Idle(), Stride("walk_f", kSpeed), Leap("leap_f", kSpeed),
            Launch()};
  }
  if (selector == "pi3") {
    ModeDefinition walk = Stride("walk_f", kSpeed);
    walk.contacts = {{0.0, 0.5, true, false}, {0.5, 1.0, false, true}};
    ModeDefinition hop = Stride("hop_f", kSpeed);
    hop.contacts = {{0.0, 0.5, true, true}, {0.5, 1.0, false, false}};
    return {Idle(), walk, hop, Leap("leap_f", kSpeed)};
  }
  if (selector == "idle_walk") return {Idle(), Stride("walk_f", kSpeed)};
  std::string valid;
  for (const auto& s : BuiltinSelectors()) valid += (valid.empty() ? "" : ", ") + s;
  throw InvalidInput("unknown mode set '" + std::string(selector) +
                     "' (valid: " + valid + ")");
}

ModeLibrary BuiltinLibrary(std::string_view selector, double dt) {
  const auto defs = BuiltinModeDefinitions(selector);
  return BuildLibrary(defs, dt);
}

std::vector<ModeDefinition> ModeDefinitionsFromJson(const Json& doc) {
  std::vector<ModeDefinition> defs;
  try {
    for (const Json& m : doc.at("modes")) {
      ModeDefinition def;
      def.name = m.at("name").get<std::string>();
      def.kind = ParseMotionKind(m.value("kind", std::string("periodic")));
      for (const Json& k : m.at("keyframes")) {
        def.keyframes.push_back({k.at("t").get<double>(),
                                 k.value("x", 0.0),
                                 k.value("z", kNominalBaseHeight),
                                 k.value("pitch", 0.0)});
      }
      if (m.contains("contacts")) {
        for (const Json& c : m.at("contacts")) {
          def.contacts.push_back({c.at("start").get<double>(),
                                  c.at("end").get<double>(),
                                  c.value("left", false),
                                  c.value("right", false)});
        }
      }
      defs.push_back(std::move(def));
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed mode-set file: ") + e.what());
  }
  return defs;
}

Json ModeDefinitionsToJson(std::span<const ModeDefinition> defs) {
  Json modes = Json::array();
  for (const auto& def : defs) {
    Json m;
    m["name"] = def.name;
    m["kind"] = std::string(MotionKindName(def.kind));
    m["keyframes"] = Json::array();
    for (const auto& k : def.keyframes) m["keyframes"].push_back(KeyframeToJson(k));
    if (!def.contacts.empty()) {
      m["contacts"] = Json::array();
      for (const auto& p : def.contacts) m["contacts"].push_back(PhaseToJson(p));
    }
    modes.push_back(std::move(m));
  }
  return Json{{"modes", std::move(modes)}};
}

Json LibraryToJson(const ModeLibrary& library) {
  Json modes = Json::array();
  for (const auto& e : library.entries()) {
    Json m;
    m["name"] = e.motion.name;
    m["kind"] = std::string(MotionKindName(e.motion.kind));
    m["dt"] = e.motion.dt;
    m["has_contacts"] = e.motion.has_contacts;
    m["samples"] = MatrixToJson(e.motion.samples);
    m["latent"] = e.latent ? VectorToJson(e.latent->z) : Json(nullptr);
    modes.push_back(std::move(m));
  }
  return Json{{"modes", std::move(modes)}};
}

ModeLibrary LibraryFromJson(const Json& j) {
  ModeLibrary library;
  try {
    for (const Json& m : j.at("modes")) {
      ReferenceMotion motion;
      motion.name = m.at("name").get<std::string>();
      motion.kind = ParseMotionKind(m.at("kind").get<std::string>());
      motion.dt = m.at("dt").get<double>();
      motion.has_contacts = m.at("has_contacts").get<bool>();
      motion.samples = MatrixFromJson(m.at("samples"));
      if (motion.samples.cols() != kRefChannels || motion.samples.rows() < 2) {
        throw InvalidInput("mode '" + motion.name +
                           "' must have >= 2 samples of 5 channels");
      }
      std::optional<LatentMode> latent;
      if (!m.at("latent").is_null()) {
        latent = LatentMode{VectorFromJson(m.at("latent")), motion.name};
      }
      library.Add(std::move(motion), std::move(latent));
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed library file: ") + e.what());
  }
  return library;
}

}  // namespace mmloco
