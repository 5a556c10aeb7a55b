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

#include "mmloco/policy.h"

#include <cmath>
#include <numbers>

#include "mmloco/biped_sim.h"

namespace mmloco {
namespace {

const double kLogSqrtTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

std::vector<int> Sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

GaussianPolicy MakePolicy(int obs_dim, int act_dim,
                          const std::vector<int>& hidden, Rng& rng,
                          double init_log_std, double output_scale) {
  GaussianPolicy p;
  p.net = Mlp(Sizes(obs_dim, hidden, act_dim));
  p.params.resize(p.net.num_params() + act_dim);
  p.params.head(p.net.num_params()) = p.net.Init(rng, output_scale);
  p.params.tail(act_dim).setConstant(init_log_std);
  p.obs_scale = Eigen::VectorXd::Ones(obs_dim);
  return p;
}

ValueFunction MakeValueFunction(int obs_dim, const std::vector<int>& hidden,
                                Rng& rng) {
  ValueFunction v;
  v.net = Mlp(Sizes(obs_dim, hidden, 1));
  v.params = v.net.Init(rng);
  v.obs_scale = Eigen::VectorXd::Ones(obs_dim);
  return v;
}

void SetOutputBias(GaussianPolicy& policy, const Eigen::VectorXd& bias) {
  if (bias.size() != policy.act_dim()) {
    throw InvalidInput("output bias has the wrong size");
  }
  const int last = policy.net.num_layers() - 1;
  policy.params.segment(policy.net.bias_offset(last), policy.act_dim()) = bias;
}

Eigen::VectorXd PolicyMean(const GaussianPolicy& policy,
                           const Eigen::VectorXd& obs) {
  if (obs.size() != policy.obs_dim()) {
    throw InvalidInput("observation size does not match the policy");
  }
  return policy.net.Forward(policy.net_params(),
                            Eigen::VectorXd(obs.cwiseProduct(policy.obs_scale)));
}

ActResult Act(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
              bool stochastic, Rng* rng) {
  ActResult out;
  out.mean = PolicyMean(policy, obs);
  const Eigen::VectorXd log_std = policy.log_std();
  out.action = out.mean;
  if (stochastic) {
    if (rng == nullptr) throw InvalidInput("stochastic action needs an rng");
    for (int i = 0; i < policy.act_dim(); ++i) {
      out.action[i] += std::exp(log_std[i]) * rng->Normal();
    }
  }
  out.log_prob = GaussianLogProb(out.mean, log_std, out.action);
  return out;
}

double GaussianLogProb(const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& log_std,
                       const Eigen::VectorXd& x) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double u = (x[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * u * u - log_std[i] - kLogSqrtTwoPi;
  }
  return lp;
}

double GaussianEntropy(const Eigen::VectorXd& log_std) {
  return log_std.sum() + log_std.size() * (0.5 + kLogSqrtTwoPi);
}

double Value(const ValueFunction& value, const Eigen::VectorXd& obs) {
  if (obs.size() != value.obs_dim()) {
    throw InvalidInput("observation size does not match the value function");
  }
  return value.net.Forward(value.params,
                           Eigen::VectorXd(obs.cwiseProduct(value.obs_scale)))[0];
}

Eigen::VectorXd BipedObsScale(int latent_dim) {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(2 + latent_dim + kStateObsDim);
  const int base = 2 + latent_dim;
  s[base + 8] = 0.2;                          // pitch rate
  s.segment(base + 9, kNumJoints).setConstant(0.1);  // joint velocities
  return s;
}

Json PolicyToJson(const GaussianPolicy& policy) {
  Json j = MlpToJson(policy.net, policy.net_params());
  j["log_std"] = VectorToJson(policy.log_std());
  j["obs_scale"] = VectorToJson(policy.obs_scale);
  return j;
}

GaussianPolicy PolicyFromJson(const Json& j) {
  GaussianPolicy p;
  Eigen::VectorXd net_params;
  p.net = MlpFromJson(j, &net_params);
  const Eigen::VectorXd log_std = VectorFromJson(j.at("log_std"), p.act_dim());
  p.obs_scale = VectorFromJson(j.at("obs_scale"), p.obs_dim());
  p.params.resize(net_params.size() + log_std.size());
  p.params << net_params, log_std;
  if (!p.params.allFinite()) throw InvalidInput("policy parameters not finite");
  return p;
}

Json ValueToJson(const ValueFunction& value) {
  Json j = MlpToJson(value.net, value.params);
  j["obs_scale"] = VectorToJson(value.obs_scale);
  return j;
}

ValueFunction ValueFromJson(const Json& j) {
  ValueFunction v;
  v.net = MlpFromJson(j, &v.params);
  if (v.net.output_dim() != 1) {
    throw InvalidInput("value network must have one output");
  }
  v.obs_scale = VectorFromJson(j.at("obs_scale"), v.obs_dim());
  return v;
}

}  // namespace mmloco
