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

#include "mmloco/lstm.h"

#include <cmath>

#include "mmloco/common.h"

namespace mmloco {
namespace {

Eigen::VectorXd Sigmoid(const Eigen::VectorXd& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

LstmParams LstmParams::Zero(int input_dim, int hidden_dim) {
  return {Eigen::MatrixXd::Zero(4 * hidden_dim, input_dim),
          Eigen::MatrixXd::Zero(4 * hidden_dim, hidden_dim),
          Eigen::VectorXd::Zero(4 * hidden_dim)};
}

LstmParams LstmParams::Random(int input_dim, int hidden_dim, Rng& rng) {
  LstmParams p = Zero(input_dim, hidden_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = bound * (2.0 * rng.Uniform() - 1.0);
    }
  };
  fill(p.w_input);
  fill(p.w_hidden);
  fill(p.bias);
  return p;
}

LstmParams& LstmParams::operator+=(const LstmParams& other) {
  w_input += other.w_input;
  w_hidden += other.w_hidden;
  bias += other.bias;
  return *this;
}

bool LstmParams::AllFinite() const {
  return w_input.allFinite() && w_hidden.allFinite() && bias.allFinite();
}

LstmTrace LstmForward(const LstmParams& params, const Eigen::MatrixXd& inputs) {
  const int H = params.hidden_dim();
  const int T = static_cast<int>(inputs.cols());
  LstmTrace tr;
  tr.input_gate.resize(H, T);
  tr.forget_gate.resize(H, T);
  tr.cell_gate.resize(H, T);
  tr.output_gate.resize(H, T);
  tr.cell.resize(H, T);
  tr.cell_tanh.resize(H, T);
  tr.hidden.resize(H, T);

  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(H);
  // Input contributions for all steps in one product.
  const Eigen::MatrixXd input_pre =
      (params.w_input * inputs).colwise() + params.bias;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd a = input_pre.col(t) + params.w_hidden * h;
    const Eigen::VectorXd i = Sigmoid(a.segment(0, H));
    const Eigen::VectorXd f = Sigmoid(a.segment(H, H));
    const Eigen::VectorXd g = a.segment(2 * H, H).array().tanh().matrix();
    const Eigen::VectorXd o = Sigmoid(a.segment(3 * H, H));
    c = f.cwiseProduct(c) + i.cwiseProduct(g);
    const Eigen::VectorXd tc = c.array().tanh().matrix();
    h = o.cwiseProduct(tc);
    tr.input_gate.col(t) = i;
    tr.forget_gate.col(t) = f;
    tr.cell_gate.col(t) = g;
    tr.output_gate.col(t) = o;
    tr.cell.col(t) = c;
    tr.cell_tanh.col(t) = tc;
    tr.hidden.col(t) = h;
  }
  return tr;
}

LstmGradient LstmBackward(const LstmParams& params, const LstmTrace& trace,
                          const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& hidden_grad) {
  const int H = params.hidden_dim();
  const int T = trace.steps();
  // Pre-activation gradients for every step; weight gradients are formed
  // afterwards as two matrix products.
  Eigen::MatrixXd pre_grad(4 * H, T);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
  for (int t = T - 1; t >= 0; --t) {
    const auto i = trace.input_gate.col(t).array();
    const auto f = trace.forget_gate.col(t).array();
    const auto g = trace.cell_gate.col(t).array();
    const auto o = trace.output_gate.col(t).array();
    const auto tc = trace.cell_tanh.col(t).array();
    Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(H);
    if (t > 0) c_prev = trace.cell.col(t - 1).array();

    const Eigen::ArrayXd dh = hidden_grad.col(t).array() + dh_next.array();
    const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc * tc);
    pre_grad.col(t).segment(0, H) = (dc * g * i * (1.0 - i)).matrix();
    pre_grad.col(t).segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
    pre_grad.col(t).segment(2 * H, H) = (dc * i * (1.0 - g * g)).matrix();
    pre_grad.col(t).segment(3 * H, H) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh_next = params.w_hidden.transpose() * pre_grad.col(t);
  }

  LstmGradient grad;
  grad.params.w_input = pre_grad * inputs.transpose();
  grad.params.w_hidden = Eigen::MatrixXd::Zero(4 * H, H);
  if (T > 1) {
    grad.params.w_hidden = pre_grad.rightCols(T - 1) *
                           trace.hidden.leftCols(T - 1).transpose();
  }
  grad.params.bias = pre_grad.rowwise().sum();
  grad.inputs = params.w_input.transpose() * pre_grad;
  return grad;
}

}  // namespace mmloco
