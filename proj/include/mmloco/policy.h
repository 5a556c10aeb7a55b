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

#ifndef MMLOCO_POLICY_H_
#define MMLOCO_POLICY_H_

#include <vector>

#include <Eigen/Dense>

#include "mmloco/common.h"
#include "mmloco/io.h"
#include "mmloco/mlp.h"

namespace mmloco {

inline constexpr double kDefaultLogStd = -1.6;

// Diagonal Gaussian policy with a tanh-MLP mean and a state-independent
// log standard deviation. Inputs are multiplied by a fixed obs_scale.
struct GaussianPolicy {
  Mlp net;
  Eigen::VectorXd params;     // [mean network, log_std]
  Eigen::VectorXd obs_scale;  // not trained

  int obs_dim() const { return net.input_dim(); }
  int act_dim() const { return net.output_dim(); }
  Eigen::Index num_net_params() const { return net.num_params(); }
  Eigen::VectorXd net_params() const { return params.head(net.num_params()); }
  Eigen::VectorXd log_std() const { return params.tail(act_dim()); }
};

// Scalar state-value network.
struct ValueFunction {
  Mlp net;
  Eigen::VectorXd params;
  Eigen::VectorXd obs_scale;

  int obs_dim() const { return net.input_dim(); }
};

// Output-layer weights are scaled by output_scale so the initial mean is
// close to the output bias.
GaussianPolicy MakePolicy(int obs_dim, int act_dim,
                          const std::vector<int>& hidden, Rng& rng,
                          double init_log_std = kDefaultLogStd,
                          double output_scale = 0.01);
ValueFunction MakeValueFunction(int obs_dim, const std::vector<int>& hidden,
                                Rng& rng);

void SetOutputBias(GaussianPolicy& policy, const Eigen::VectorXd& bias);

Eigen::VectorXd PolicyMean(const GaussianPolicy& policy,
                           const Eigen::VectorXd& obs);

struct ActResult {
  Eigen::VectorXd action;
  Eigen::VectorXd mean;
  double log_prob = 0.0;
};

// Samples when stochastic (rng required), otherwise returns the mean.
// log_prob is the density of the returned action in both cases.
ActResult Act(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
              bool stochastic, Rng* rng);

double GaussianLogProb(const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& log_std,
                       const Eigen::VectorXd& x);
double GaussianEntropy(const Eigen::VectorXd& log_std);

double Value(const ValueFunction& value, const Eigen::VectorXd& obs);

// Fixed input scaling for [clock, latent, proprio] observations: joint
// velocities x0.1, pitch rate x0.2, everything else x1.
Eigen::VectorXd BipedObsScale(int latent_dim);

Json PolicyToJson(const GaussianPolicy& policy);
GaussianPolicy PolicyFromJson(const Json& j);
Json ValueToJson(const ValueFunction& value);
ValueFunction ValueFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_POLICY_H_
