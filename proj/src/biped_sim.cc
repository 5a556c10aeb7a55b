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

#include "mmloco/biped_sim.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmloco/common.h"

namespace mmloco {
namespace {

struct LegIndex {
  int hip;
  int knee;
};

constexpr LegIndex kLegs[2] = {{kHipL, kKneeL}, {kHipR, kKneeR}};

Eigen::Matrix2d Rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

// Perpendicular used for omega x r and the pitch moment r x F.
Eigen::Vector2d Perp(const Eigen::Vector2d& r) { return {-r.y(), r.x()}; }

FootKinematics FootAt(const Coords& q, const Coords& qdot, int leg,
                      const RobotConfig& cfg) {
  const double qh = q[kLegs[leg].hip];
  const double qk = q[kLegs[leg].knee];
  const double l1 = cfg.thigh_length, l2 = cfg.shank_length;
  const Eigen::Vector2d local(
      l1 * std::sin(qh) + l2 * std::sin(qh + qk),
      -cfg.hip_offset - l1 * std::cos(qh) - l2 * std::cos(qh + qk));
  Eigen::Matrix2d local_jac;
  local_jac << l1 * std::cos(qh) + l2 * std::cos(qh + qk),
      l2 * std::cos(qh + qk), l1 * std::sin(qh) + l2 * std::sin(qh + qk),
      l2 * std::sin(qh + qk);

  const Eigen::Matrix2d rot = Rotation(q[kBasePitch]);
  FootKinematics out;
  out.offset = rot * local;
  out.jacobian = rot * local_jac;
  out.position = Eigen::Vector2d(q[kBaseX], q[kBaseZ]) + out.offset;
  const Eigen::Vector2d joint_rates(qdot[kLegs[leg].hip],
                                    qdot[kLegs[leg].knee]);
  out.velocity = Eigen::Vector2d(qdot[kBaseX], qdot[kBaseZ]) +
                 qdot[kBasePitch] * Perp(out.offset) +
                 out.jacobian * joint_rates;
  return out;
}

// Mass the foot presents along `dir` (unit vector).
double EffectiveMass(const FootKinematics& foot, const Eigen::Vector2d& dir,
                     const RobotConfig& cfg) {
  const double base = 1.0 / cfg.base_mass;
  const double rot = std::pow(Perp(foot.offset).dot(dir), 2) / cfg.base_inertia;
  const double legs =
      (foot.jacobian.transpose() * dir).squaredNorm() / cfg.joint_inertia;
  return 1.0 / (base + rot + legs);
}

struct ContactMemory {
  std::array<bool, 2> contact{false, false};
  std::array<double, 2> anchor{0.0, 0.0};
};

double Penetration(const FootKinematics& foot, const Terrain& terrain) {
  return terrain.Height(foot.position.x()) - foot.position.y();
}

// Tangential spring-damper force before the friction cone is applied.
double StickForce(const FootKinematics& foot, double anchor, double h,
                  const RobotConfig& cfg) {
  const double vx = foot.velocity.x();
  const double mx = EffectiveMass(foot, Eigen::Vector2d::UnitX(), cfg);
  const double damping = std::copysign(
      std::min(cfg.tangential_damping * std::abs(vx), mx * std::abs(vx) / h),
      vx);
  return -cfg.tangential_stiffness * (foot.position.x() - anchor) - damping;
}

std::array<Eigen::Vector2d, 2> ForcesAt(const Coords& q, const Coords& qdot,
                                        const ContactMemory& memory,
                                        const Terrain& terrain,
                                        const RobotConfig& cfg) {
  const double h = cfg.control_dt / cfg.substeps;
  std::array<Eigen::Vector2d, 2> forces{Eigen::Vector2d::Zero(),
                                        Eigen::Vector2d::Zero()};
  for (int leg = 0; leg < 2; ++leg) {
    const FootKinematics foot = FootAt(q, qdot, leg, cfg);
    const double penetration = Penetration(foot, terrain);
    if (!(penetration > 0.0)) continue;
    const double vz = foot.velocity.y();
    // Explicit damping on a light foot overshoots within one substep unless
    // it is limited to the impulse that stops the foot.
    const double mz = EffectiveMass(foot, Eigen::Vector2d::UnitY(), cfg);
    const double damping =
        std::copysign(std::min(cfg.contact_damping * std::abs(vz),
                               mz * std::abs(vz) / h),
                      vz);
    const double normal = std::max(
        0.0, cfg.contact_stiffness *
                     std::min(penetration, cfg.max_penetration) -
                 damping);
    const double anchor =
        memory.contact[leg] ? memory.anchor[leg] : foot.position.x();
    const double limit = cfg.friction * normal;
    const double tangential =
        std::clamp(StickForce(foot, anchor, h, cfg), -limit, limit);
    forces[leg] = Eigen::Vector2d(tangential, normal);
  }
  return forces;
}

// Touchdown places the anchor under the foot; slipping drags it along so the
// spring force stays on the friction cone.
ContactMemory UpdateContacts(const Coords& q, const Coords& qdot,
                             const ContactMemory& memory,
                             const Terrain& terrain, const RobotConfig& cfg) {
  ContactMemory next;
  for (int leg = 0; leg < 2; ++leg) {
    const FootKinematics foot = FootAt(q, qdot, leg, cfg);
    const double penetration = Penetration(foot, terrain);
    if (!(penetration > 0.0)) continue;
    next.contact[leg] = true;
    if (!memory.contact[leg]) {
      next.anchor[leg] = foot.position.x();
      continue;
    }
    double anchor = memory.anchor[leg];
    const double limit =
        cfg.friction * cfg.contact_stiffness *
        std::min(penetration, cfg.max_penetration);
    const double spring =
        -cfg.tangential_stiffness * (foot.position.x() - anchor);
    if (std::abs(spring) > limit) {
      anchor = foot.position.x() +
               std::copysign(limit, spring) / cfg.tangential_stiffness;
    }
    next.anchor[leg] = anchor;
  }
  return next;
}

Coords Acceleration(const Coords& q, const Coords& qdot,
                    const ContactMemory& memory, const JointVector& action,
                    const Terrain& terrain, const RobotConfig& cfg) {
  const auto forces = ForcesAt(q, qdot, memory, terrain, cfg);
  const JointVector joints = q.tail<kNumJoints>();
  const JointVector rates = qdot.tail<kNumJoints>();
  const JointVector tau = PdTorque(action, joints, rates, cfg);

  Coords acc = Coords::Zero();
  acc[kBaseZ] = -cfg.gravity;
  for (int leg = 0; leg < 2; ++leg) {
    const Eigen::Vector2d& f = forces[leg];
    const FootKinematics foot = FootAt(q, qdot, leg, cfg);
    acc[kBaseX] += f.x() / cfg.base_mass;
    acc[kBaseZ] += f.y() / cfg.base_mass;
    const Eigen::Vector2d hip_offset =
        Rotation(q[kBasePitch]) * Eigen::Vector2d(0.0, -cfg.hip_offset);
    acc[kBasePitch] += Perp(hip_offset).dot(f) / cfg.base_inertia;
    const Eigen::Vector2d gen = foot.jacobian.transpose() * f;
    const int hip = kLegs[leg].hip, knee = kLegs[leg].knee;
    const double hip_drive = tau[hip - kHipL] - cfg.joint_damping * qdot[hip];
    acc[hip] = (hip_drive + gen[0]) / cfg.joint_inertia;
    // The hip motor pushes back on the torso.
    acc[kBasePitch] -= hip_drive / cfg.base_inertia;
    acc[knee] =
        (tau[knee - kHipL] - cfg.joint_damping * qdot[knee] + gen[1]) /
        cfg.joint_inertia;
  }
  return acc;
}

}  // namespace

double RobotConfig::nominal_height() const {
  const double qh = nominal_joints[0], qk = nominal_joints[1];
  return hip_offset + thigh_length * std::cos(qh) +
         shank_length * std::cos(qh + qk);
}

int RobotConfig::cycle_steps() const {
  return static_cast<int>(std::lround(cycle_duration / control_dt));
}

FootKinematics Foot(const SimState& state, int leg, const RobotConfig& cfg) {
  if (leg < 0 || leg > 1) throw InvalidInput("leg index must be 0 or 1");
  return FootAt(state.q, state.qdot, leg, cfg);
}

std::array<Eigen::Vector2d, 2> ContactForces(const SimState& state,
                                             const Terrain& terrain,
                                             const RobotConfig& cfg) {
  return ForcesAt(state.q, state.qdot, {state.contact, state.anchor}, terrain,
                  cfg);
}

JointVector PdTorque(const JointVector& action, const JointVector& q,
                     const JointVector& qdot, const RobotConfig& cfg) {
  JointVector tau = cfg.kp * (action - q) - cfg.kd * qdot;
  return tau.cwiseMax(-cfg.torque_limit).cwiseMin(cfg.torque_limit);
}

SimState Step(const SimState& state, const JointVector& action,
              const Terrain& terrain, const RobotConfig& cfg) {
  const double h = cfg.control_dt / cfg.substeps;
  SimState next = state;
  Coords q = state.q, v = state.qdot;
  ContactMemory memory{state.contact, state.anchor};
  for (int i = 0; i < cfg.substeps; ++i) {
    const Coords half =
        v + 0.5 * h * Acceleration(q, v, memory, action, terrain, cfg);
    q += h * half;
    v = half + 0.5 * h * Acceleration(q, half, memory, action, terrain, cfg);
    memory = UpdateContacts(q, v, memory, terrain, cfg);
  }
  next.q = q;
  next.qdot = v;
  next.time = state.time + cfg.control_dt;
  double phase =
      state.phase + state.clock_rate * cfg.control_dt / cfg.cycle_duration;
  phase -= std::floor(phase);
  next.phase = phase < 1.0 ? phase : 0.0;
  next.contact = memory.contact;
  next.anchor = memory.anchor;
  next.support_height = terrain.SupportHeight(q[kBaseX]);
  return next;
}

SimState StandingState(const RobotConfig& cfg, const Terrain& terrain,
                       double x) {
  SimState s;
  const double compression =
      cfg.base_mass * cfg.gravity / (2.0 * cfg.contact_stiffness);
  s.q[kBaseX] = x;
  s.q.tail<kNumJoints>() = cfg.nominal_joints;
  // Feet sit at the base x only when thigh and shank angles cancel; use the
  // actual foot positions for the ground height.
  const FootKinematics left = FootAt(s.q, s.qdot, 0, cfg);
  const double ground = std::max(terrain.Height(x + left.offset.x()),
                                 terrain.Height(x + FootAt(s.q, s.qdot, 1, cfg)
                                                        .offset.x()));
  s.q[kBaseZ] = ground - left.offset.y() - compression;
  s.contact = {true, true};
  for (int leg = 0; leg < 2; ++leg) {
    s.anchor[leg] = FootAt(s.q, s.qdot, leg, cfg).position.x();
  }
  s.support_height = terrain.SupportHeight(x);
  return s;
}

JointVector HoldingAction(const SimState& state, const Terrain& terrain,
                          const RobotConfig& cfg) {
  const auto forces = ContactForces(state, terrain, cfg);
  JointVector a = state.q.tail<kNumJoints>();
  for (int leg = 0; leg < 2; ++leg) {
    const Eigen::Vector2d gen =
        FootAt(state.q, state.qdot, leg, cfg).jacobian.transpose() *
        forces[leg];
    a[kLegs[leg].hip - kHipL] -= gen[0] / cfg.kp;
    a[kLegs[leg].knee - kHipL] -= gen[1] / cfg.kp;
  }
  return a;
}

Eigen::VectorXd Observation::Flat() const {
  Eigen::VectorXd out(size());
  out << clock, latent, proprio;
  return out;
}

Observation Observe(const SimState& state, const Eigen::VectorXd& latent,
                    const RobotConfig& cfg) {
  Observation o;
  const double angle =
      cfg.clock_two_pi ? 2.0 * std::numbers::pi * state.phase : state.phase;
  o.clock = {std::sin(angle), std::cos(angle)};
  o.latent = latent;
  const double pitch = state.q[kBasePitch];
  const double heading = std::cos(pitch) * state.qdot[kBaseX] +
                         std::sin(pitch) * state.qdot[kBaseZ];
  o.proprio << state.q[kBaseZ] - state.support_height, pitch,
      state.q.tail<kNumJoints>(), heading, state.qdot[kBaseZ],
      state.qdot[kBasePitch], state.qdot.tail<kNumJoints>();
  return o;
}

RewardTerms Reward(const SimState& state, const ReferencePose& ref,
                   const RewardConfig& cfg) {
  RewardTerms out;
  TrackingError& e = out.error;
  e.position = {state.q[kBaseX] - ref.x,
                state.q[kBaseZ] - state.support_height - ref.z};
  e.orientation = state.q[kBasePitch] - ref.pitch;
  if (ref.has_contacts) {
    for (int leg = 0; leg < 2; ++leg) {
      const bool want = ref.contact[leg] > 0.5;
      e.contact[leg] = want != state.contact[leg] ? 1.0 : 0.0;
    }
  }
  const Eigen::Vector3d& w = cfg.weights;
  const Eigen::Vector3d& k = cfg.sensitivity;
  out.reward = w[0] * std::exp(-k[0] * e.position.norm()) +
               w[1] * std::exp(-k[1] * std::abs(e.orientation)) +
               w[2] * std::exp(-k[2] * e.contact.norm());
  return out;
}

ReferencePose TrackReference(const ReferenceMotion& motion, double phase,
                             double entry_x, double entry_phase,
                             bool clip_completed) {
  const int n = motion.length();
  const Eigen::VectorXd xs = motion.positions();
  auto sample = [&](double phi, int channel) {
    const double u = std::clamp(phi, 0.0, 1.0) * (n - 1);
    const int i = std::min(static_cast<int>(std::floor(u)), n - 2);
    const double frac = u - i;
    const double a = channel < 0 ? xs[i] : motion.samples(i, channel);
    const double b = channel < 0 ? xs[i + 1] : motion.samples(i + 1, channel);
    return a + frac * (b - a);
  };
  const double phi = clip_completed ? 1.0 : phase;
  ReferencePose ref;
  ref.x = entry_x + sample(phi, -1) - sample(entry_phase, -1);
  ref.z = sample(phi, kRefZ);
  ref.pitch = sample(phi, kRefPitch);
  ref.has_contacts = motion.has_contacts;
  const int lower = std::min(
      static_cast<int>(std::floor(std::clamp(phi, 0.0, 1.0) * (n - 1))),
      n - 1);
  ref.contact = {motion.samples(lower, kRefContactL),
                 motion.samples(lower, kRefContactR)};
  return ref;
}

Termination CheckTermination(const SimState& state, const RobotConfig& cfg) {
  if (!state.q.allFinite() || !state.qdot.allFinite() ||
      !std::isfinite(state.support_height)) {
    return Termination::kBlowup;
  }
  if (state.q[kBaseZ] - state.support_height < 0.3 * cfg.nominal_height() ||
      std::abs(state.q[kBasePitch]) > 1.0) {
    return Termination::kFallen;
  }
  return Termination::kRunning;
}

Json RobotConfigToJson(const RobotConfig& cfg) {
  Json j;
  j["base_mass"] = cfg.base_mass;
  j["base_inertia"] = cfg.base_inertia;
  j["hip_offset"] = cfg.hip_offset;
  j["thigh_length"] = cfg.thigh_length;
  j["shank_length"] = cfg.shank_length;
  j["joint_inertia"] = cfg.joint_inertia;
  j["joint_damping"] = cfg.joint_damping;
  j["kp"] = cfg.kp;
  j["kd"] = cfg.kd;
  j["torque_limit"] = cfg.torque_limit;
  j["contact_stiffness"] = cfg.contact_stiffness;
  j["contact_damping"] = cfg.contact_damping;
  j["friction"] = cfg.friction;
  j["tangential_stiffness"] = cfg.tangential_stiffness;
  j["tangential_damping"] = cfg.tangential_damping;
  j["max_penetration"] = cfg.max_penetration;
  j["gravity"] = cfg.gravity;
  j["control_dt"] = cfg.control_dt;
  j["substeps"] = cfg.substeps;
  j["cycle_duration"] = cfg.cycle_duration;
  j["clock_two_pi"] = cfg.clock_two_pi;
  j["nominal_joints"] = VectorToJson(cfg.nominal_joints);
  return j;
}

RobotConfig RobotConfigFromJson(const Json& j) {
  RobotConfig c;
  auto real = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  real("base_mass", c.base_mass);
  real("base_inertia", c.base_inertia);
  real("hip_offset", c.hip_offset);
  real("thigh_length", c.thigh_length);
  real("shank_length", c.shank_length);
  real("joint_inertia", c.joint_inertia);
  real("joint_damping", c.joint_damping);
  real("kp", c.kp);
  real("kd", c.kd);
  real("torque_limit", c.torque_limit);
  real("contact_stiffness", c.contact_stiffness);
  real("contact_damping", c.contact_damping);
  real("friction", c.friction);
  real("tangential_stiffness", c.tangential_stiffness);
  real("tangential_damping", c.tangential_damping);
  real("max_penetration", c.max_penetration);
  real("gravity", c.gravity);
  real("control_dt", c.control_dt);
  real("cycle_duration", c.cycle_duration);
  if (j.contains("substeps")) c.substeps = j.at("substeps").get<int>();
  if (j.contains("clock_two_pi")) c.clock_two_pi = j.at("clock_two_pi").get<bool>();
  if (j.contains("nominal_joints")) {
    c.nominal_joints = VectorFromJson(j.at("nominal_joints"), kNumJoints);
  }
  const double positives[] = {c.base_mass,         c.base_inertia,
                              c.thigh_length,      c.shank_length,
                              c.joint_inertia,     c.kp,
                              c.torque_limit,      c.contact_stiffness,
                              c.control_dt,        c.cycle_duration,
                              c.gravity};
  for (double v : positives) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput("robot config values must be positive and finite");
    }
  }
  if (c.joint_damping < 0 || c.kd < 0 || c.contact_damping < 0 ||
      c.friction < 0 || c.tangential_damping < 0 ||
      c.tangential_stiffness < 0 || c.hip_offset < 0 ||
      !(c.max_penetration > 0) || c.substeps < 1) {
    throw InvalidInput("robot config has a negative damping, friction or "
                       "substep count");
  }
  return c;
}

}  // namespace mmloco
