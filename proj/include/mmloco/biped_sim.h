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

#ifndef MMLOCO_BIPED_SIM_H_
#define MMLOCO_BIPED_SIM_H_

#include <array>

#include <Eigen/Dense>

#include "mmloco/io.h"
#include "mmloco/refmotion.h"
#include "mmloco/terrain.h"

namespace mmloco {

// Generalized coordinates: [x, z, pitch, hipL, kneeL, hipR, kneeR].
inline constexpr int kNumCoords = 7;
inline constexpr int kNumJoints = 4;
inline constexpr int kStateObsDim = 13;

using Coords = Eigen::Matrix<double, kNumCoords, 1>;
using JointVector = Eigen::Matrix<double, kNumJoints, 1>;

enum Coord : int {
  kBaseX = 0,
  kBaseZ = 1,
  kBasePitch = 2,
  kHipL = 3,
  kKneeL = 4,
  kHipR = 5,
  kKneeR = 6,
};

// Planar biped: a rigid base (x, z, pitch) with two two-link legs ending in
// point feet. Each joint is a damped double integrator driven by its motor
// torque and the contact force at its foot. The base feels gravity, the foot
// forces applied at the hips and the reaction of the hip motors.
struct RobotConfig {
  double base_mass = 6.0;         // kg
  double base_inertia = 0.05;     // kg m^2 about the pitch axis
  double hip_offset = 0.08;       // m, hips below the base COM
  double thigh_length = 0.22;     // m
  double shank_length = 0.22;     // m
  double joint_inertia = 0.01;    // kg m^2
  double joint_damping = 0.05;    // N m s
  double kp = 30.0;               // N m / rad
  double kd = 0.5;                // N m s / rad
  double torque_limit = 30.0;     // N m
  double contact_stiffness = 2e4; // N / m
  double contact_damping = 200.0; // N s / m
  double friction = 0.8;
  // Stance feet stick to an anchor through a tangential spring-damper until
  // the force leaves the friction cone, then slide.
  double tangential_stiffness = 5000.0;  // N / m
  double tangential_damping = 20.0;      // N s / m
  double max_penetration = 0.05;  // m, depth beyond which force stops rising
  double gravity = 9.81;
  double control_dt = 0.02;       // s
  int substeps = 20;
  double cycle_duration = 1.0;    // s of one clock cycle at rate 1
  bool clock_two_pi = true;       // clock = [sin 2 pi phi, cos 2 pi phi]
  // Left foot ahead, right foot behind, knees bent back.
  JointVector nominal_joints =
      (JointVector() << 0.41, -0.45, 0.04, -0.45).finished();

  double leg_length() const { return thigh_length + shank_length; }
  // Base height when standing in the nominal pose with unloaded feet.
  double nominal_height() const;
  // Control steps per clock cycle at rate 1.
  int cycle_steps() const;
};

struct SimState {
  Coords q = Coords::Zero();
  Coords qdot = Coords::Zero();
  double time = 0.0;
  double phase = 0.0;        // [0, 1)
  double clock_rate = 1.0;
  std::array<bool, 2> contact{false, false};
  // Stick point of each foot in contact (world x).
  std::array<double, 2> anchor{0.0, 0.0};
  double support_height = 0.0;
};

struct FootKinematics {
  Eigen::Vector2d position;  // world
  Eigen::Vector2d velocity;  // world
  Eigen::Vector2d offset;    // position relative to base COM
  Eigen::Matrix2d jacobian;  // d position / d (hip, knee), world frame
};

// leg 0 = left, 1 = right.
FootKinematics Foot(const SimState& state, int leg, const RobotConfig& cfg);

// Penalty contact force on each foot (world frame). Feet not flagged in
// contact get no tangential spring force.
std::array<Eigen::Vector2d, 2> ContactForces(const SimState& state,
                                             const Terrain& terrain,
                                             const RobotConfig& cfg);

// tau = Kp (a - q) - Kd qdot, clipped to the torque limit. No limits on a.
JointVector PdTorque(const JointVector& action, const JointVector& q,
                     const JointVector& qdot, const RobotConfig& cfg);

// Advances one control period with velocity-Verlet substeps, then updates
// contact flags, support plane and phase. Non-finite values propagate into
// the returned state and are reported by Termination.
SimState Step(const SimState& state, const JointVector& action,
              const Terrain& terrain, const RobotConfig& cfg);

// Nominal pose standing at rest on the terrain at `x`, with the feet
// pre-compressed by the static load M g / (2 k_n).
SimState StandingState(const RobotConfig& cfg, const Terrain& terrain,
                       double x = 0.0);
// PD targets that cancel the static contact load of `state`.
JointVector HoldingAction(const SimState& state, const Terrain& terrain,
                          const RobotConfig& cfg);

struct Observation {
  Eigen::Vector2d clock;
  Eigen::VectorXd latent;
  Eigen::Matrix<double, kStateObsDim, 1> proprio;

  int size() const { return 2 + static_cast<int>(latent.size()) + kStateObsDim; }
  // [clock, latent, proprio].
  Eigen::VectorXd Flat() const;
};

Observation Observe(const SimState& state, const Eigen::VectorXd& latent,
                    const RobotConfig& cfg);

struct RewardConfig {
  Eigen::Vector3d weights{0.5, 0.5, 0.0};      // w_p, w_o, w_c
  Eigen::Vector3d sensitivity{5.0, 5.0, 2.0};  // k_p, k_o, k_c

  double max_step_reward() const { return weights.sum(); }
};

struct ReferencePose {
  double x = 0.0;
  double z = kNominalBaseHeight;  // above the support plane
  double pitch = 0.0;
  std::array<double, 2> contact{0.0, 0.0};
  bool has_contacts = false;
};

struct TrackingError {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // [dx, dz]
  double orientation = 0.0;
  Eigen::Vector2d contact = Eigen::Vector2d::Zero();   // per-leg mismatch
};

struct RewardTerms {
  double reward = 0.0;
  TrackingError error;
};

// r = w_p exp(-k_p |er_p|) + w_o exp(-k_o |er_o|) + w_c exp(-k_c |er_c|).
// References without a contact schedule leave er_c = 0.
RewardTerms Reward(const SimState& state, const ReferencePose& ref,
                   const RewardConfig& cfg);

// Reference at `phase` for a mode entered at (entry_x, entry_phase).
// x = entry_x + (cumulative dx at phase) - (cumulative dx at entry_phase).
// Once a transient motion has completed its clip the final sample is held.
ReferencePose TrackReference(const ReferenceMotion& motion, double phase,
                             double entry_x, double entry_phase = 0.0,
                             bool clip_completed = false);

enum class Termination { kRunning, kFallen, kBlowup };

Termination CheckTermination(const SimState& state, const RobotConfig& cfg);

Json RobotConfigToJson(const RobotConfig& cfg);
RobotConfig RobotConfigFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_BIPED_SIM_H_
