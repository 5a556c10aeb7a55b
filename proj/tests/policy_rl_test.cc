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
#include <vector>

#include <gtest/gtest.h>

#include "mmloco/policy.h"
#include "mmloco/ppo.h"
#include "support/oracles.h"

namespace mmloco {
namespace {

TEST(PolicyTest, ZeroNetworkDeterministicActionIsZero) {
  Rng rng(1);
  GaussianPolicy p = MakePolicy(5, 4, {8, 8}, rng);
  p.params.head(p.num_net_params()).setZero();
  const ActResult a = Act(p, Eigen::VectorXd::Ones(5), false, nullptr);
  EXPECT_EQ(a.action.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PolicyTest, SameSeedSameSample) {
  Rng init(2);
  const GaussianPolicy p = MakePolicy(5, 4, {8}, init);
  const Eigen::VectorXd o = Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  Rng a(77), b(77);
  const ActResult x = Act(p, o, true, &a);
  const ActResult y = Act(p, o, true, &b);
  EXPECT_TRUE(x.action == y.action);
  EXPECT_EQ(x.log_prob, y.log_prob);
  EXPECT_NEAR(x.log_prob, GaussianLogProb(x.mean, p.log_std(), x.action),
              1e-12);
}

TEST(PolicyTest, LogDensityIntegratesToOneAlongSlices) {
  const Eigen::Vector2d mean(0.3, -1.0);
  const Eigen::Vector2d log_std(-0.7, 0.2);
  for (int axis = 0; axis < 2; ++axis) {
    // Fix the other coordinate at its mean and divide out its density.
    const double other_sd = std::exp(log_std[1 - axis]);
    const double other_peak = 1.0 / (other_sd * std::sqrt(2.0 * M_PI));
    const double sd = std::exp(log_std[axis]);
    const double h = sd / 200.0;
    double integral = 0.0;
    for (double u = mean[axis] - 8 * sd; u < mean[axis] + 8 * sd; u += h) {
      Eigen::Vector2d x = mean;
      x[axis] = u;
      integral += std::exp(GaussianLogProb(mean, log_std, x)) * h;
    }
    EXPECT_NEAR(integral / other_peak, 1.0, 1e-3);
  }
}

TEST(PolicyTest, JsonRoundTripExact) {
  Rng rng(3);
  GaussianPolicy p = MakePolicy(7, 4, {6, 5}, rng);
  p.obs_scale = Eigen::VectorXd::LinSpaced(7, 0.1, 1.0);
  const GaussianPolicy back = PolicyFromJson(Json::parse(PolicyToJson(p).dump()));
  EXPECT_TRUE(back.params == p.params);
  EXPECT_TRUE(back.obs_scale == p.obs_scale);
  EXPECT_EQ(back.net.sizes(), p.net.sizes());
}

TEST(MlpTest, ForwardMatchesFlatLayoutOracle) {
  Rng rng(4);
  const Mlp net({3, 5, 2});
  const Eigen::VectorXd params = net.Init(rng);
  const Eigen::Vector3d x(0.2, -0.4, 0.9);
  EXPECT_LT((net.Forward(params, Eigen::VectorXd(x)) -
             oracle::NaiveMlp(net.sizes(), params, x))
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(GaeTest, LambdaOneIsMonteCarloMinusBaseline) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.UniformInt(30));
    const bool terminal = trial % 2 == 0;
    Eigen::VectorXd r(n), v(n + 1);
    for (int i = 0; i < n; ++i) r[i] = rng.Normal();
    for (int i = 0; i <= n; ++i) v[i] = rng.Normal();
    const double gamma = 0.9 + 0.09 * rng.Uniform();
    const Advantages a = ComputeGae(r, v, terminal, gamma, 1.0);
    for (int t = 0; t < n; ++t) {
      double g = 0.0, disc = 1.0;
      for (int k = t; k < n; ++k) {
        g += disc * r[k];
        disc *= gamma;
      }
      if (!terminal) g += disc * v[n];
      EXPECT_NEAR(a.advantages[t], g - v[t], 1e-10);
      EXPECT_NEAR(a.returns[t], g, 1e-10);
    }
  }
}

struct Batch {
  GaussianPolicy policy;
  Eigen::MatrixXd obs, actions;
  Eigen::VectorXd logp, adv;
};

Batch RandomBatch(std::uint64_t seed, double logp_noise) {
  Rng rng(seed);
  Batch b;
  b.policy = MakePolicy(3, 2, {4}, rng, -0.3, 1.0);
  b.policy.obs_scale = Eigen::Vector3d::Ones();
  const int n = 16;
  b.obs.resize(3, n);
  b.actions.resize(2, n);
  b.logp.resize(n);
  b.adv.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) b.obs(d, i) = rng.Normal();
    const ActResult a = Act(b.policy, b.obs.col(i), true, &rng);
    b.actions.col(i) = a.action;
    b.logp[i] = a.log_prob + logp_noise * (2.0 * rng.Uniform() - 1.0);
    b.adv[i] = rng.Normal();
  }
  return b;
}

TEST(SurrogateTest, InsideClipRangeEqualsUnclippedObjective) {
  const Batch b = RandomBatch(6, 0.15);  // |log ratio| < 0.15 < log(1.2)
  const double clip = 0.2;
  const SurrogateResult r = SurrogateLoss(b.policy, b.obs, b.actions, b.logp,
                                          b.adv, clip, 0.0);
  double obj = 0.0;
  for (Eigen::Index i = 0; i < b.obs.cols(); ++i) {
    const double lp = GaussianLogProb(PolicyMean(b.policy, b.obs.col(i)),
                                      b.policy.log_std(), b.actions.col(i));
    const double ratio = std::exp(lp - b.logp[i]);
    ASSERT_LE(std::abs(ratio - 1.0), clip);
    obj += ratio * b.adv[i];
  }
  EXPECT_EQ(r.clip_fraction, 0.0);
  EXPECT_NEAR(r.loss, -obj / b.obs.cols(), 1e-14);
}

TEST(SurrogateTest, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 200; seed < 212; ++seed) {
    EXPECT_LT(oracle::SurrogateGradientCheck(seed), 1e-4) << "seed " << seed;
  }
}

TEST(SurrogateTest, ZeroAdvantagesGiveZeroPolicyGradient) {
  Batch b = RandomBatch(7, 0.5);
  b.adv.setZero();
  const SurrogateResult r =
      SurrogateLoss(b.policy, b.obs, b.actions, b.logp, b.adv, 0.2, 0.0);
  EXPECT_EQ(r.grad.cwiseAbs().maxCoeff(), 0.0);
  // With an entropy bonus only log_std moves.
  const SurrogateResult e =
      SurrogateLoss(b.policy, b.obs, b.actions, b.logp, b.adv, 0.2, 0.1);
  EXPECT_EQ(e.grad.head(b.policy.num_net_params()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(e.grad.tail(2).cwiseAbs().minCoeff(), 0.0);
}

// One-step bandit with reward -(a - 1)^2.
Trajectory BanditEpisode(const GaussianPolicy& policy,
                         const ValueFunction& value, Rng& rng) {
  const Eigen::VectorXd o = Eigen::VectorXd::Ones(1);
  const ActResult act = Act(policy, o, true, &rng);
  Trajectory t;
  t.obs = Eigen::MatrixXd::Ones(1, 2);
  t.actions = act.action;
  t.rewards = Eigen::VectorXd::Constant(1, -std::pow(act.action[0] - 1.0, 2));
  t.log_probs = Eigen::VectorXd::Constant(1, act.log_prob);
  t.values = Eigen::VectorXd::Zero(2);
  t.values[0] = Value(value, o);
  t.terminal = true;
  return t;
}

TEST(PpoUpdateTest, BanditMeanConvergesToOptimum) {
  Rng rng(8);
  GaussianPolicy policy = MakePolicy(1, 1, {}, rng, -0.5);
  policy.obs_scale = Eigen::VectorXd::Ones(1);
  ValueFunction value = MakeValueFunction(1, {}, rng);
  PpoLearner learner = PpoLearner::Create(policy, value);
  PpoConfig cfg;
  // The bandit drives log_std toward -inf; an Adam step much wider than
  // the remaining std makes the mean wander, so keep the step moderate.
  cfg.policy_lr = 3e-3;
  cfg.value_lr = 1e-2;
  cfg.horizon = 1;
  for (int update = 0; update < 200; ++update) {
    std::vector<Trajectory> batch;
    for (int e = 0; e < 32; ++e) {
      batch.push_back(BanditEpisode(learner.policy, learner.value, rng));
    }
    ASSERT_TRUE(PpoUpdate(learner, batch, cfg, rng).applied);
  }
  const double mean = PolicyMean(learner.policy, Eigen::VectorXd::Ones(1))[0];
  EXPECT_NEAR(mean, 1.0, 0.05);
  EXPECT_LT(learner.policy.params.tail(1)[0], -0.5);
}

TEST(PpoUpdateTest, NonFiniteBatchRejectedAndParamsKept) {
  Rng rng(9);
  GaussianPolicy policy = MakePolicy(1, 1, {}, rng);
  policy.obs_scale = Eigen::VectorXd::Ones(1);
  PpoLearner learner =
      PpoLearner::Create(policy, MakeValueFunction(1, {}, rng));
  std::vector<Trajectory> batch = {
      BanditEpisode(learner.policy, learner.value, rng),
      BanditEpisode(learner.policy, learner.value, rng)};
  batch[1].rewards[0] = std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd before = learner.policy.params;
  const UpdateStats s = PpoUpdate(learner, batch, PpoConfig{}, rng);
  EXPECT_FALSE(s.applied);
  EXPECT_FALSE(s.failure.empty());
  EXPECT_TRUE(learner.policy.params == before);
}

TEST(PpoUpdateTest, EpisodeReturnBookkeepingIsExact) {
  Rng rng(10);
  GaussianPolicy policy = MakePolicy(1, 1, {}, rng);
  policy.obs_scale = Eigen::VectorXd::Ones(1);
  PpoLearner learner =
      PpoLearner::Create(policy, MakeValueFunction(1, {}, rng));
  Trajectory t;
  const int n = 7;
  t.obs = Eigen::MatrixXd::Ones(1, n + 1);
  t.actions = Eigen::MatrixXd::Zero(1, n);
  t.rewards = Eigen::VectorXd::LinSpaced(n, 0.1, 0.7);
  t.log_probs = Eigen::VectorXd::Zero(n);
  t.values = Eigen::VectorXd::Zero(n + 1);
  t.initial_mode = 2;
  t.final_mode = 1;
  const UpdateStats s = PpoUpdate(learner, {t}, PpoConfig{}, rng);
  EXPECT_EQ(s.mean_return.at({2, 1}), t.rewards.sum());
}

TEST(PpoConfigTest, JsonRoundTripAndValidation) {
  PpoConfig c;
  c.clip_ratio = 0.3;
  c.horizon = 123;
  const PpoConfig back = PpoConfigFromJson(Json::parse(PpoConfigToJson(c).dump()));
  EXPECT_EQ(PpoConfigToJson(back), PpoConfigToJson(c));
  c.discount = 1.5;
  EXPECT_THROW(c.Validate(), InvalidInput);
}

}  // namespace
}  // namespace mmloco
