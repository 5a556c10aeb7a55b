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

#ifndef MMLOCO_LSTM_H_
#define MMLOCO_LSTM_H_

#include <vector>

#include <Eigen/Dense>

namespace mmloco {

class Rng;

// Single-layer LSTM. Gate blocks are stacked [input, forget, cell, output]
// along the rows of the weight matrices.
struct LstmParams {
  Eigen::MatrixXd w_input;   // 4H x D
  Eigen::MatrixXd w_hidden;  // 4H x H
  Eigen::VectorXd bias;      // 4H

  int input_dim() const { return static_cast<int>(w_input.cols()); }
  int hidden_dim() const { return static_cast<int>(w_hidden.cols()); }

  static LstmParams Zero(int input_dim, int hidden_dim);
  // Uniform(-1/sqrt(H), 1/sqrt(H)) for every entry.
  static LstmParams Random(int input_dim, int hidden_dim, Rng& rng);

  LstmParams& operator+=(const LstmParams& other);
  bool AllFinite() const;
};

// Per-step activations kept for backpropagation through time. Column t holds
// step t; the zero initial state is implicit.
struct LstmTrace {
  Eigen::MatrixXd input_gate, forget_gate, cell_gate, output_gate;
  Eigen::MatrixXd cell, cell_tanh, hidden;  // H x T each

  int steps() const { return static_cast<int>(hidden.cols()); }
};

// Runs the cell over the columns of `inputs` (D x T) from zero state.
LstmTrace LstmForward(const LstmParams& params, const Eigen::MatrixXd& inputs);

struct LstmGradient {
  LstmParams params;
  Eigen::MatrixXd inputs;  // D x T
};

// `hidden_grad` (H x T) is dLoss/dh_t from outside the recurrence.
LstmGradient LstmBackward(const LstmParams& params, const LstmTrace& trace,
                          const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& hidden_grad);

}  // namespace mmloco

#endif  // MMLOCO_LSTM_H_
