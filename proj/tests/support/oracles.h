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

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the gradient code under test.

#ifndef MMLOCO_TESTS_SUPPORT_ORACLES_H_
#define MMLOCO_TESTS_SUPPORT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mmloco/common.h"
#include "mmloco/mode_encoder.h"
#include "mmloco/planner.h"
#include "mmloco/policy.h"
#include "mmloco/ppo.h"

namespace mmloco::oracle {

inline double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Central differences of f at x.
inline Eigen::VectorXd NumericGradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd p = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double MaxRelativeError(const Eigen::VectorXd& analytic,
                               const Eigen::VectorXd& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, RelativeError(analytic[i], numeric[i]));
  }
  return worst;
}

// Scalar-loop LSTM from zero state; returns H x T hidden states.
inline Eigen::MatrixXd NaiveLstm(const LstmParams& p, const Eigen::MatrixXd& x) {
  const int H = p.hidden_dim();
  const int T = static_cast<int>(x.cols());
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> h(H, 0.0), c(H, 0.0);
  Eigen::MatrixXd out(H, T);
  for (int t = 0; t < T; ++t) {
    std::vector<double> pre(4 * H);
    for (int r = 0; r < 4 * H; ++r) {
      double s = p.bias[r];
      for (int d = 0; d < x.rows(); ++d) s += p.w_input(r, d) * x(d, t);
      for (int k = 0; k < H; ++k) s += p.w_hidden(r, k) * h[k];
      pre[r] = s;
    }
    for (int k = 0; k < H; ++k) {
      const double i = sigmoid(pre[k]);
      const double f = sigmoid(pre[H + k]);
      const double g = std::tanh(pre[2 * H + k]);
      const double o = sigmoid(pre[3 * H + k]);
      c[k] = f * c[k] + i * g;
      h[k] = o * std::tanh(c[k]);
      out(k, t) = h[k];
    }
  }
  return out;
}

// Autoencoder loss over a batch, evaluated with the scalar LSTM.
inline double NaiveAutoencoderLoss(const EncoderParams& enc,
                                   const DecoderParams& dec,
                                   const std::vector<Eigen::MatrixXd>& batch) {
  double loss = 0.0;
  for (const auto& seq : batch) {
    const Eigen::MatrixXd x = seq.transpose();
    const Eigen::MatrixXd he = NaiveLstm(enc.lstm, x);
    const Eigen::VectorXd z = enc.projection * he.col(he.cols() - 1);
    const Eigen::MatrixXd hd = NaiveLstm(dec.lstm, z.replicate(1, x.cols()));
    const Eigen::MatrixXd diff = dec.projection * hd - x;
    loss += diff.squaredNorm() / static_cast<double>(diff.size());
  }
  return loss / static_cast<double>(batch.size());
}

// One random tiny autoencoder and batch; returns the max relative error of
// the backpropagated gradient against central differences.
inline double EncoderGradientCheck(std::uint64_t seed) {
  Rng rng(seed);
  const int hidden = 2 + static_cast<int>(rng.UniformInt(3));
  const int latent = 1 + static_cast<int>(rng.UniformInt(3));
  const int batch_size = 1 + static_cast<int>(rng.UniformInt(3));
  EncoderParams enc = RandomEncoder(5, hidden, latent, rng);
  DecoderParams dec = RandomDecoder(latent, hidden, 5, rng);
  std::vector<Eigen::MatrixXd> batch;
  for (int b = 0; b < batch_size; ++b) {
    const int T = 2 + static_cast<int>(rng.UniformInt(6));
    Eigen::MatrixXd s(T, 5);
    for (int i = 0; i < s.size(); ++i) s.data()[i] = 2.0 * rng.Uniform() - 1.0;
    batch.push_back(s);
  }
  const AutoencoderGradient g = EncoderGradient(enc, dec, batch);
  const Eigen::VectorXd analytic = Flatten(g.encoder, g.decoder);
  const Eigen::VectorXd x = Flatten(enc, dec);
  EncoderParams e2 = enc;
  DecoderParams d2 = dec;
  const Eigen::VectorXd numeric = NumericGradient(
      [&](const Eigen::VectorXd& v) {
        Unflatten(v, e2, d2);
        return NaiveAutoencoderLoss(e2, d2, batch);
      },
      x);
  return MaxRelativeError(analytic, numeric);
}

// tanh MLP from the documented flat layout: per layer a column-major
// out x in weight block followed by the bias.
inline Eigen::VectorXd NaiveMlp(const std::vector<int>& sizes,
                                const Eigen::VectorXd& params,
                                const Eigen::VectorXd& input) {
  Eigen::VectorXd x = input;
  Eigen::Index off = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    Eigen::VectorXd y(out);
    for (int r = 0; r < out; ++r) {
      double s = params[off + static_cast<Eigen::Index>(in) * out + r];
      for (int c = 0; c < in; ++c) s += params[off + c * out + r] * x[c];
      y[r] = (l + 2 < sizes.size()) ? std::tanh(s) : s;
    }
    off += static_cast<Eigen::Index>(in) * out + out;
    x = y;
  }
  return x;
}

// Clipped surrogate (negated, batch mean) minus the entropy bonus, computed
// from scratch.
inline double NaiveSurrogate(const GaussianPolicy& policy,
                             const Eigen::VectorXd& params,
                             const Eigen::MatrixXd& obs,
                             const Eigen::MatrixXd& actions,
                             const Eigen::VectorXd& old_log_probs,
                             const Eigen::VectorXd& adv, double clip,
                             double entropy_coef) {
  const int A = policy.act_dim();
  const Eigen::VectorXd net = params.head(params.size() - A);
  const Eigen::VectorXd log_std = params.tail(A);
  double total = 0.0;
  for (Eigen::Index i = 0; i < obs.cols(); ++i) {
    const Eigen::VectorXd o = obs.col(i).cwiseProduct(policy.obs_scale);
    const Eigen::VectorXd mean = NaiveMlp(policy.net.sizes(), net, o);
    double lp = 0.0;
    for (int a = 0; a < A; ++a) {
      const double sd = std::exp(log_std[a]);
      const double u = (actions(a, i) - mean[a]) / sd;
      lp += -0.5 * u * u - std::log(sd * std::sqrt(2.0 * M_PI));
    }
    const double ratio = std::exp(lp - old_log_probs[i]);
    const double clipped = std::min(std::max(ratio, 1.0 - clip), 1.0 + clip);
    total += std::min(ratio * adv[i], clipped * adv[i]);
  }
  double entropy = 0.0;
  for (int a = 0; a < A; ++a) {
    entropy += 0.5 * std::log(2.0 * M_PI * M_E) + log_std[a];
  }
  return -total / static_cast<double>(obs.cols()) - entropy_coef * entropy;
}

// Random tiny policy (obs dim 3, one hidden unit) and batch.
inline double SurrogateGradientCheck(std::uint64_t seed) {
  Rng rng(seed);
  const int act_dim = 1 + static_cast<int>(rng.UniformInt(2));
  GaussianPolicy policy = MakePolicy(3, act_dim, {1}, rng, -0.5, 1.0);
  for (Eigen::Index i = 0; i < policy.params.size(); ++i) {
    policy.params[i] = rng.Uniform() - 0.5;
  }
  policy.obs_scale = Eigen::Vector3d(1.0, 0.5, 2.0);
  const int n = 4 + static_cast<int>(rng.UniformInt(5));
  Eigen::MatrixXd obs(3, n), actions(act_dim, n);
  Eigen::VectorXd old_lp(n), adv(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) obs(d, i) = 2.0 * rng.Uniform() - 1.0;
    for (int a = 0; a < act_dim; ++a) actions(a, i) = rng.Normal();
    // Old log-probs scattered around the current ones so that both clipped
    // and unclipped samples occur.
    old_lp[i] = GaussianLogProb(PolicyMean(policy, obs.col(i)),
                                policy.log_std(), actions.col(i)) +
                0.4 * rng.Normal();
    adv[i] = rng.Normal();
  }
  const double clip = 0.2;
  const double ent = 0.01 * rng.Uniform();
  const SurrogateResult r =
      SurrogateLoss(policy, obs, actions, old_lp, adv, clip, ent);
  const Eigen::VectorXd numeric = NumericGradient(
      [&](const Eigen::VectorXd& p) {
        return NaiveSurrogate(policy, p, obs, actions, old_lp, adv, clip, ent);
      },
      policy.params, 1e-6);
  return MaxRelativeError(r.grad, numeric);
}

// Deterministic stand-in for the robot in planner tests: a point mass whose
// per-knot velocity and height depend on the commanded mode, integrated over
// a few control steps per knot. The reward follows the planner's per-step
// goal reward so plan returns are comparable with PlanRollout.
struct StubPlanModel {
  std::vector<double> velocity;  // per mode, m per control step
  std::vector<double> height;    // per mode
  int steps_per_knot = 5;
  Eigen::Vector2d goal{1.0, 0.5};

  static StubPlanModel Random(int modes, Rng& rng) {
    StubPlanModel m;
    for (int i = 0; i < modes; ++i) {
      m.velocity.push_back(0.1 * (rng.Uniform() - 0.3));
      m.height.push_back(0.4 + 0.2 * rng.Uniform());
    }
    m.goal = {0.5 + rng.Uniform(), 0.5};
    return m;
  }

  Eigen::VectorXd Evaluate(const ModePlan& plan) const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(plan.modes.size()));
    double x = 0.0;
    for (size_t k = 0; k < plan.modes.size(); ++k) {
      const int m = plan.modes[k];
      for (int s = 0; s < steps_per_knot; ++s) {
        x += velocity[m];
        r[static_cast<Eigen::Index>(k)] += GoalReward(goal, x, height[m]);
      }
    }
    return r;
  }
};

// Best total return over all n^k plans.
inline double ExhaustiveBest(const PlanEvaluator& eval, int modes, int knots,
                             ModePlan* best_plan = nullptr) {
  ModePlan plan;
  plan.modes.assign(knots, 0);
  double best = -1.0;
  while (true) {
    const double r = eval(plan).sum();
    if (r > best) {
      best = r;
      if (best_plan != nullptr) *best_plan = plan;
    }
    int k = 0;
    while (k < knots && ++plan.modes[k] == modes) plan.modes[k++] = 0;
    if (k == knots) break;
  }
  return best;
}

}  // namespace mmloco::oracle

#endif  // MMLOCO_TESTS_SUPPORT_ORACLES_H_
