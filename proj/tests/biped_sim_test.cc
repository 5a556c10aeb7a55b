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

#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "mmloco/biped_sim.h"
#include "mmloco/common.h"
#include "mmloco/terrain.h"

namespace mmloco {
namespace {

constexpr double kG = 9.81;

JointVector Joints(double v) { return JointVector::Constant(v); }

TEST(PdTorqueTest, Examples) {
  const RobotConfig cfg;
  EXPECT_NEAR(PdTorque(Joints(0.5), Joints(0.2), Joints(1.0), cfg)[0],
              30.0 * 0.3 - 0.5 * 1.0, 1e-12);
  EXPECT_EQ(PdTorque(Joints(0.3), Joints(0.3), Joints(0.0), cfg)[2], 0.0);
  EXPECT_EQ(PdTorque(Joints(2.0), Joints(0.0), Joints(0.0), cfg)[1], 30.0);
  EXPECT_EQ(PdTorque(Joints(-2.0), Joints(0.0), Joints(0.0), cfg)[3], -30.0);
}

RobotConfig FreeFlightConfig() {
  RobotConfig cfg;
  cfg.kp = 0.0;
  cfg.kd = 0.0;
  cfg.joint_damping = 0.0;
  return cfg;
}

SimState Airborne(const RobotConfig& cfg) {
  SimState s = StandingState(cfg, Terrain::Flat());
  s.q[kBaseZ] = 5.0;
  s.qdot << 0.7, 3.0, 0.4, 0.5, -0.3, 0.2, 0.1;
  s.contact = {false, false};
  return s;
}

double MechanicalEnergy(const SimState& s, const RobotConfig& cfg) {
  const double m = cfg.base_mass;
  return 0.5 * m * (s.qdot[kBaseX] * s.qdot[kBaseX] +
                    s.qdot[kBaseZ] * s.qdot[kBaseZ]) +
         0.5 * cfg.base_inertia * s.qdot[kBasePitch] * s.qdot[kBasePitch] +
         0.5 * cfg.joint_inertia * s.qdot.tail<kNumJoints>().squaredNorm() +
         m * cfg.gravity * s.q[kBaseZ];
}

TEST(StepTest, BallisticVerticalVelocity) {
  const RobotConfig cfg = FreeFlightConfig();
  SimState s = Airborne(cfg);
  for (int i = 0; i < 20; ++i) {
    const SimState next = Step(s, Joints(0.0), Terrain::Flat(), cfg);
    EXPECT_NEAR(next.qdot[kBaseZ] - s.qdot[kBaseZ], -kG * cfg.control_dt, 1e-9);
    EXPECT_NEAR(next.qdot[kBaseX], s.qdot[kBaseX], 1e-12);
    s = next;
  }
}

TEST(StepTest, BallisticEnergyConserved) {
  const RobotConfig cfg = FreeFlightConfig();
  SimState s = Airborne(cfg);
  const double e0 = MechanicalEnergy(s, cfg);
  double prev = e0;
  for (int i = 0; i < 25; ++i) {
    s = Step(s, Joints(0.0), Terrain::Flat(), cfg);
    const double e = MechanicalEnergy(s, cfg);
    // One control step is substeps x 1 ms.
    EXPECT_LT(std::abs(e - prev) / cfg.substeps, 1e-6);
    prev = e;
  }
  EXPECT_LT(std::abs(prev - e0), 1e-6);
}

TEST(StepTest, StaticStandMatchesSpringCompression) {
  const RobotConfig cfg;
  const Terrain flat;
  SimState s = StandingState(cfg, flat);
  const double expected =
      cfg.nominal_height() - cfg.base_mass * kG / (2.0 * cfg.contact_stiffness);
  EXPECT_NEAR(s.q[kBaseZ], expected, 1e-9);
  const JointVector hold = HoldingAction(s, flat, cfg);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    s = Step(s, hold, flat, cfg);
    worst = std::max(worst, std::abs(s.q[kBaseZ] - expected));
  }
  EXPECT_LT(worst, 1e-3);
  EXPECT_EQ(CheckTermination(s, cfg), Termination::kRunning);
}

TEST(StepTest, DeterministicBitIdentical) {
  const RobotConfig cfg;
  const Terrain t = Terrain::Gap(0.3, 0.2);
  SimState a = StandingState(cfg, t);
  SimState b = a;
  const JointVector act = (JointVector() << 0.6, -0.2, 0.1, -0.9).finished();
  for (int i = 0; i < 50; ++i) {
    a = Step(a, act, t, cfg);
    b = Step(b, act, t, cfg);
  }
  EXPECT_TRUE(a.q == b.q);
  EXPECT_TRUE(a.qdot == b.qdot);
  EXPECT_EQ(a.phase, b.phase);
}

TEST(StepTest, ClockRateTwoRunsTwoCycles) {
  RobotConfig cfg;
  SimState s = StandingState(cfg, Terrain::Flat());
  s.clock_rate = 2.0;
  const JointVector hold = HoldingAction(s, Terrain::Flat(), cfg);
  double travelled = 0.0;
  for (int i = 0; i < cfg.cycle_steps(); ++i) {
    const double before = s.phase;
    s = Step(s, hold, Terrain::Flat(), cfg);
    double d = s.phase - before;
    if (d < 0) d += 1.0;
    travelled += d;
  }
  EXPECT_NEAR(travelled, 2.0, 1e-9);
}

TEST(ContactTest, NoForceAboveGroundAndNeverTensile) {
  const RobotConfig cfg;
  const Terrain t;
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    SimState s = StandingState(cfg, t);
    s.q[kBaseZ] += 0.06 * (rng.Uniform() - 0.5);
    s.q[kBasePitch] = 0.2 * (rng.Uniform() - 0.5);
    for (int j = 3; j < kNumCoords; ++j) s.q[j] += 0.3 * (rng.Uniform() - 0.5);
    for (int j = 0; j < kNumCoords; ++j) s.qdot[j] = 4.0 * rng.Normal();
    s.contact = {rng.Uniform() < 0.5, rng.Uniform() < 0.5};
    const auto forces = ContactForces(s, t, cfg);
    for (int leg = 0; leg < 2; ++leg) {
      const FootKinematics f = Foot(s, leg, cfg);
      EXPECT_GE(forces[leg].y(), 0.0);
      EXPECT_LE(std::abs(forces[leg].x()),
                cfg.friction * forces[leg].y() + 1e-12);
      if (f.position.y() > t.Height(f.position.x())) {
        EXPECT_EQ(forces[leg].norm(), 0.0);
      }
    }
  }
}

TEST(ObserveTest, ClockAndSupportRelativeHeight) {
  const RobotConfig cfg;
  SimState s = StandingState(cfg, Terrain::Flat());
  s.phase = 0.0;
  Observation o = Observe(s, Eigen::Vector4d::Zero(), cfg);
  EXPECT_NEAR(o.clock[0], 0.0, 1e-15);
  EXPECT_NEAR(o.clock[1], 1.0, 1e-15);
  s.phase = 0.25;
  o = Observe(s, Eigen::Vector4d::Zero(), cfg);
  EXPECT_NEAR(o.clock[0], 1.0, 1e-15);
  EXPECT_NEAR(o.clock[1], 0.0, 1e-15);

  const Terrain block = Terrain::Block(-1.0, 3.0, 0.4);
  SimState on_block = StandingState(cfg, block);
  on_block.q[kBaseZ] = 0.9;
  EXPECT_DOUBLE_EQ(on_block.support_height, 0.4);
  EXPECT_NEAR(Observe(on_block, Eigen::Vector4d::Zero(), cfg).proprio[0], 0.5,
              1e-12);
}

TEST(ObserveTest, NoAbsoluteHorizontalPosition) {
  const RobotConfig cfg;
  SimState a = StandingState(cfg, Terrain::Flat(), 0.0);
  SimState b = StandingState(cfg, Terrain::Flat(), 12.5);
  b.phase = a.phase;
  const Eigen::Vector4d z(0.1, 0.2, 0.3, 0.4);
  EXPECT_TRUE(Observe(a, z, cfg).Flat() == Observe(b, z, cfg).Flat());
  EXPECT_EQ(Observe(a, z, cfg).size(), 2 + 4 + kStateObsDim);
}

TEST(RewardTest, Examples) {
  const RobotConfig cfg;
  SimState s = StandingState(cfg, Terrain::Flat());
  s.q[kBaseZ] = kNominalBaseHeight;
  s.q[kBasePitch] = 0.0;
  ReferencePose ref;
  ref.x = s.q[kBaseX];
  RewardConfig rc;
  EXPECT_NEAR(Reward(s, ref, rc).reward, 1.0, 1e-12);

  ref.x = s.q[kBaseX] - 0.2;
  EXPECT_NEAR(Reward(s, ref, rc).reward, 0.5 * std::exp(-1.0) + 0.5, 1e-12);
  EXPECT_NEAR(Reward(s, ref, rc).reward, 0.6839, 1e-4);

  ref.x = s.q[kBaseX];
  ref.has_contacts = true;
  ref.contact = {1.0, 1.0};
  s.contact = {false, false};
  rc.weights = {0.35, 0.35, 0.3};
  const double expected = 0.35 + 0.35 + 0.3 * std::exp(-2.0 * std::sqrt(2.0));
  EXPECT_NEAR(Reward(s, ref, rc).reward, expected, 1e-12);
  EXPECT_NEAR(Reward(s, ref, rc).reward, 0.7177, 1e-4);
}

TEST(RewardTest, InvariantToCommonTranslation) {
  const RobotConfig cfg;
  SimState s = StandingState(cfg, Terrain::Flat());
  ReferencePose ref;
  ref.x = 0.07;
  ref.z = 0.48;
  ref.pitch = 0.03;
  const double r0 = Reward(s, ref, RewardConfig{}).reward;
  for (double shift : {-3.0, 0.5, 100.0}) {
    SimState t = s;
    t.q[kBaseX] += shift;
    ReferencePose rt = ref;
    rt.x += shift;
    EXPECT_NEAR(Reward(t, rt, RewardConfig{}).reward, r0, 1e-12);
  }
}

TEST(TrackReferenceTest, Examples) {
  const ModeLibrary lib = BuiltinLibrary("pi2");
  const ReferenceMotion& idle = lib.motion(0);
  for (double phi : {0.0, 0.3, 0.99}) {
    const ReferencePose p = TrackReference(idle, phi, 0.7);
    EXPECT_EQ(p.x, 0.7);
    EXPECT_EQ(p.z, kNominalBaseHeight);
  }
  const ReferenceMotion& walk = lib.motion(1);
  EXPECT_NEAR(walk.clip_displacement(), 0.5, 1e-12);
  EXPECT_NEAR(TrackReference(walk, 0.5, 1.0).x, 1.25, 1e-12);

  const ReferenceMotion& launch = lib.motion(3);
  const ReferencePose done = TrackReference(launch, 0.2, 0.0, 0.0, true);
  const int last = launch.length() - 1;
  EXPECT_NEAR(done.x, launch.positions()[last], 1e-12);
  EXPECT_EQ(done.z, launch.samples(last, kRefZ));
  EXPECT_EQ(done.pitch, launch.samples(last, kRefPitch));
}

TEST(TerminationTest, Examples) {
  const RobotConfig cfg;
  SimState s = StandingState(cfg, Terrain::Flat());
  EXPECT_EQ(CheckTermination(s, cfg), Termination::kRunning);
  SimState tipped = s;
  tipped.q[kBasePitch] = 1.5;
  EXPECT_EQ(CheckTermination(tipped, cfg), Termination::kFallen);
  SimState bad = s;
  bad.qdot[4] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(CheckTermination(bad, cfg), Termination::kBlowup);
}

TEST(TerrainTest, GapAndBlockHeights) {
  Terrain t = Terrain::Gap(1.0, 0.3);
  t.Add({SegmentKind::kBlock, 1.6, 1.0, 0.4});
  EXPECT_EQ(t.Height(0.5), 0.0);
  EXPECT_EQ(t.Height(1.1), kGapDepth);
  EXPECT_EQ(t.SupportHeight(1.1), 0.0);
  EXPECT_EQ(t.Height(2.0), 0.4);
  EXPECT_EQ(t.Height(2.7), 0.0);
  const Terrain back = TerrainFromJson(Json::parse(TerrainToJson(t).dump()));
  EXPECT_EQ(TerrainToJson(back), TerrainToJson(t));
  EXPECT_THROW(Terrain::Gap(0.0, -0.1), InvalidInput);
}

TEST(RobotConfigTest, JsonRoundTrip) {
  RobotConfig cfg;
  cfg.kp = 41.5;
  cfg.nominal_joints[2] = 0.123;
  const RobotConfig back =
      RobotConfigFromJson(Json::parse(RobotConfigToJson(cfg).dump()));
  EXPECT_EQ(RobotConfigToJson(back), RobotConfigToJson(cfg));
}

}  // namespace
}  // namespace mmloco
