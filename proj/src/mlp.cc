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

#include "mmloco/mlp.h"

#include <cmath>

namespace mmloco {
namespace {

using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
using MatrixMap = Eigen::Map<Eigen::MatrixXd>;

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InvalidInput("an MLP needs at least two sizes");
  for (int s : sizes_) {
    if (s < 1) throw InvalidInput("MLP layer sizes must be positive");
  }
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(num_params_);
    num_params_ += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
}

Eigen::VectorXd Mlp::Init(Rng& rng, double output_scale) const {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(num_params_);
  for (int l = 0; l < num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    const double scale = l + 1 == num_layers() ? output_scale : 1.0;
    const Eigen::Index n = static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
    for (Eigen::Index i = 0; i < n; ++i) {
      params[offsets_[l] + i] = scale * bound * (2.0 * rng.Uniform() - 1.0);
    }
  }
  return params;
}

Eigen::MatrixXd Mlp::Forward(const Eigen::VectorXd& params,
                             const Eigen::MatrixXd& inputs,
                             Cache* cache) const {
  if (params.size() != num_params_ || inputs.rows() != input_dim()) {
    throw InvalidInput("MLP parameter or input size mismatch");
  }
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.push_back(inputs);
  }
  Eigen::MatrixXd x = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    ConstMatrixMap w(params.data() + weight_offset(l), sizes_[l + 1],
                     sizes_[l]);
    Eigen::Map<const Eigen::VectorXd> b(params.data() + bias_offset(l),
                                        sizes_[l + 1]);
    Eigen::MatrixXd y = w * x;
    y.colwise() += b;
    if (l + 1 < num_layers()) y = y.array().tanh().matrix();
    x = std::move(y);
    if (cache != nullptr) cache->activations.push_back(x);
  }
  return x;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& params,
                             const Eigen::VectorXd& input) const {
  return Forward(params, Eigen::MatrixXd(input), nullptr).col(0);
}

Eigen::MatrixXd Mlp::Backward(const Eigen::VectorXd& params,
                              const Cache& cache,
                              const Eigen::MatrixXd& output_grad,
                              Eigen::VectorXd* param_grad) const {
  if (static_cast<int>(cache.activations.size()) != num_layers() + 1) {
    throw InvalidInput("MLP cache does not match the network");
  }
  Eigen::MatrixXd delta = output_grad;
  for (int l = num_layers() - 1; l >= 0; --l) {
    if (l + 1 < num_layers()) {
      const Eigen::MatrixXd& y = cache.activations[l + 1];
      delta = (delta.array() * (1.0 - y.array().square())).matrix();
    }
    const Eigen::MatrixXd& x = cache.activations[l];
    if (param_grad != nullptr) {
      MatrixMap gw(param_grad->data() + weight_offset(l), sizes_[l + 1],
                   sizes_[l]);
      Eigen::Map<Eigen::VectorXd> gb(param_grad->data() + bias_offset(l),
                                     sizes_[l + 1]);
      gw.noalias() += delta * x.transpose();
      gb += delta.rowwise().sum();
    }
    ConstMatrixMap w(params.data() + weight_offset(l), sizes_[l + 1],
                     sizes_[l]);
    delta = w.transpose() * delta;
  }
  return delta;
}

Json MlpToJson(const Mlp& net, const Eigen::VectorXd& params) {
  Json j;
  j["sizes"] = net.sizes();
  j["params"] = VectorToJson(params);
  return j;
}

Mlp MlpFromJson(const Json& j, Eigen::VectorXd* params) {
  Mlp net(j.at("sizes").get<std::vector<int>>());
  *params = VectorFromJson(j.at("params"), net.num_params());
  if (!params->allFinite()) throw InvalidInput("MLP parameters not finite");
  return net;
}

}  // namespace mmloco
