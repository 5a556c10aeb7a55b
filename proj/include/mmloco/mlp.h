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

#ifndef MMLOCO_MLP_H_
#define MMLOCO_MLP_H_

#include <vector>

#include <Eigen/Dense>

#include "mmloco/common.h"
#include "mmloco/io.h"

namespace mmloco {

// Fully connected network with tanh hidden layers and a linear output.
// Parameters live in one flat vector: for each layer the weight matrix
// (out x in, column-major) followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; at least two entries.
  explicit Mlp(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index num_params() const { return num_params_; }

  // Layer offsets into the flat vector.
  Eigen::Index weight_offset(int layer) const { return offsets_[layer]; }
  Eigen::Index bias_offset(int layer) const {
    return offsets_[layer] + static_cast<Eigen::Index>(sizes_[layer + 1]) *
                                 sizes_[layer];
  }

  // Uniform(+-1/sqrt(fan_in)) weights, zero biases; the last layer's weights
  // are multiplied by output_scale.
  Eigen::VectorXd Init(Rng& rng, double output_scale = 1.0) const;

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // [0] = input, columns = batch
  };

  // inputs: input_dim x N. Returns output_dim x N.
  Eigen::MatrixXd Forward(const Eigen::VectorXd& params,
                          const Eigen::MatrixXd& inputs,
                          Cache* cache = nullptr) const;
  Eigen::VectorXd Forward(const Eigen::VectorXd& params,
                          const Eigen::VectorXd& input) const;

  // Adds d loss / d params to *param_grad given d loss / d outputs. Returns
  // d loss / d inputs.
  Eigen::MatrixXd Backward(const Eigen::VectorXd& params, const Cache& cache,
                           const Eigen::MatrixXd& output_grad,
                           Eigen::VectorXd* param_grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index num_params_ = 0;
};

Json MlpToJson(const Mlp& net, const Eigen::VectorXd& params);
// Returns the network and fills *params; validates the parameter count.
Mlp MlpFromJson(const Json& j, Eigen::VectorXd* params);

}  // namespace mmloco

#endif  // MMLOCO_MLP_H_
