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

#include "mmloco/ppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmloco {
namespace {

void ClipNorm(Eigen::VectorXd& grad, double max_norm) {
  if (max_norm <= 0.0) return;
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
}

Eigen::MatrixXd Columns(const Eigen::MatrixXd& m,
                        const std::vector<int>& index) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(index.size()));
  for (size_t i = 0; i < index.size(); ++i) out.col(i) = m.col(index[i]);
  return out;
}

Eigen::VectorXd Entries(const Eigen::VectorXd& v,
                        const std::vector<int>& index) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(index.size()));
  for (size_t i = 0; i < index.size(); ++i) out[i] = v[index[i]];
  return out;
}

}  // namespace

void PpoConfig::Validate() const {
  if (!(discount > 0.0 && discount <= 1.0) ||
      !(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    throw InvalidInput("discount and GAE lambda must lie in (0, 1]");
  }
  if (!(clip_ratio > 0.0)) throw InvalidInput("clip ratio must be positive");
  if (epochs < 1 || minibatches < 1 || horizon < 1) {
    throw InvalidInput("epochs, minibatches and horizon must be >= 1");
  }
  if (!(policy_lr > 0.0) || !(value_lr > 0.0) || entropy_coef < 0.0) {
    throw InvalidInput("learning rates must be positive");
  }
}

Advantages ComputeGae(const Eigen::VectorXd& rewards,
                      const Eigen::VectorXd& values, bool terminal,
                      double discount, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n + 1) {
    throw InvalidInput("GAE needs one more value than rewards");
  }
  Advantages out;
  out.advantages.resize(n);
  double next_value = terminal ? 0.0 : values[n];
  double acc = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double delta = rewards[t] + discount * next_value - values[t];
    acc = delta + discount * lambda * acc;
    out.advantages[t] = acc;
    next_value = values[t];
  }
  out.returns = out.advantages + values.head(n);
  return out;
}

SurrogateResult SurrogateLoss(const GaussianPolicy& policy,
                              const Eigen::MatrixXd& obs,
                              const Eigen::MatrixXd& actions,
                              const Eigen::VectorXd& old_log_probs,
                              const Eigen::VectorXd& advantages,
                              double clip_ratio, double entropy_coef) {
  const Eigen::Index n = obs.cols();
  if (n == 0 || actions.cols() != n || old_log_probs.size() != n ||
      advantages.size() != n || actions.rows() != policy.act_dim()) {
    throw InvalidInput("surrogate batch shapes are inconsistent");
  }
  const int act_dim = policy.act_dim();
  const Eigen::VectorXd net_params = policy.net_params();
  const Eigen::VectorXd log_std = policy.log_std();
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();

  Mlp::Cache cache;
  const Eigen::MatrixXd scaled = policy.obs_scale.asDiagonal() * obs;
  const Eigen::MatrixXd mean = policy.net.Forward(net_params, scaled, &cache);

  SurrogateResult out;
  out.grad = Eigen::VectorXd::Zero(policy.params.size());
  Eigen::MatrixXd mean_grad(act_dim, n);
  Eigen::VectorXd std_grad = Eigen::VectorXd::Zero(act_dim);
  double objective = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd u =
        (actions.col(i) - mean.col(i)).array() * inv_std;
    const double log_prob =
        GaussianLogProb(mean.col(i), log_std, actions.col(i));
    const double ratio = std::exp(log_prob - old_log_probs[i]);
    const double a = advantages[i];
    const double clipped =
        std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    const double unclipped_term = ratio * a;
    const double clipped_term = clipped * a;
    out.approx_kl += old_log_probs[i] - log_prob;
    if (std::abs(ratio - 1.0) > clip_ratio) out.clip_fraction += 1.0;
    if (unclipped_term <= clipped_term) {
      objective += unclipped_term;
      const double scale = -unclipped_term / static_cast<double>(n);
      mean_grad.col(i) = scale * (u * inv_std).matrix();
      std_grad += scale * (u.square() - 1.0).matrix();
    } else {
      objective += clipped_term;
      mean_grad.col(i).setZero();
    }
  }
  out.entropy = GaussianEntropy(log_std);
  out.loss = -objective / static_cast<double>(n) - entropy_coef * out.entropy;
  out.approx_kl /= static_cast<double>(n);
  out.clip_fraction /= static_cast<double>(n);

  Eigen::VectorXd net_grad = Eigen::VectorXd::Zero(net_params.size());
  policy.net.Backward(net_params, cache, mean_grad, &net_grad);
  out.grad.head(net_params.size()) = net_grad;
  out.grad.tail(act_dim) = std_grad.array() - entropy_coef;
  return out;
}

ValueLossResult ValueLoss(const ValueFunction& value, const Eigen::MatrixXd& obs,
                          const Eigen::VectorXd& targets) {
  const Eigen::Index n = obs.cols();
  if (n == 0 || targets.size() != n) {
    throw InvalidInput("value batch shapes are inconsistent");
  }
  Mlp::Cache cache;
  const Eigen::MatrixXd scaled = value.obs_scale.asDiagonal() * obs;
  const Eigen::RowVectorXd v = value.net.Forward(value.params, scaled, &cache);
  const Eigen::RowVectorXd err = v - targets.transpose();
  ValueLossResult out;
  out.loss = err.squaredNorm() / static_cast<double>(n);
  out.grad = Eigen::VectorXd::Zero(value.params.size());
  value.net.Backward(value.params, cache,
                     (2.0 / static_cast<double>(n)) * err, &out.grad);
  return out;
}

PpoLearner PpoLearner::Create(GaussianPolicy policy, ValueFunction value) {
  PpoLearner l;
  l.policy_adam = AdamState::Zero(policy.params.size());
  l.value_adam = AdamState::Zero(value.params.size());
  l.policy = std::move(policy);
  l.value = std::move(value);
  return l;
}

UpdateStats PpoUpdate(PpoLearner& learner,
                      const std::vector<Trajectory>& trajectories,
                      const PpoConfig& cfg, Rng& rng) {
  if (trajectories.empty()) throw InvalidInput("PPO update needs trajectories");
  UpdateStats stats;
  std::map<std::pair<int, int>, int> counts;
  int total = 0;
  for (const Trajectory& t : trajectories) {
    if (t.obs.cols() != t.length() + 1 || t.values.size() != t.length() + 1 ||
        t.actions.cols() != t.length() || t.log_probs.size() != t.length()) {
      throw InvalidInput("trajectory lengths are inconsistent");
    }
    total += t.length();
    const auto key = std::make_pair(t.initial_mode, t.final_mode);
    stats.mean_return[key] += t.episode_return();
    ++counts[key];
  }
  for (auto& [key, sum] : stats.mean_return) sum /= counts[key];
  stats.samples = total;
  if (total == 0) {
    stats.failure = "no samples";
    return stats;
  }

  const int obs_dim = learner.policy.obs_dim();
  const int act_dim = learner.policy.act_dim();
  Eigen::MatrixXd obs(obs_dim, total), actions(act_dim, total);
  Eigen::VectorXd log_probs(total), advantages(total), targets(total);
  int col = 0;
  for (const Trajectory& t : trajectories) {
    const Advantages adv = ComputeGae(t.rewards, t.values, t.terminal,
                                      cfg.discount, cfg.gae_lambda);
    const int n = t.length();
    obs.middleCols(col, n) = t.obs.leftCols(n);
    actions.middleCols(col, n) = t.actions;
    log_probs.segment(col, n) = t.log_probs;
    advantages.segment(col, n) = adv.advantages;
    targets.segment(col, n) = adv.returns;
    col += n;
  }
  const double mean = advantages.mean();
  const double sd = std::sqrt((advantages.array() - mean).square().mean());
  advantages = (advantages.array() - mean) / (sd + 1e-8);

  if (!obs.allFinite() || !actions.allFinite() || !advantages.allFinite() ||
      !targets.allFinite() || !log_probs.allFinite()) {
    stats.failure = "non-finite batch";
    return stats;
  }

  const PpoLearner snapshot = learner;
  const int minibatches = std::min(cfg.minibatches, total);
  std::vector<int> order(total);
  int steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (int i = total - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.UniformInt(i + 1));
      std::swap(order[i], order[j]);
    }
    for (int b = 0; b < minibatches; ++b) {
      const int begin = b * total / minibatches;
      const int end = (b + 1) * total / minibatches;
      const std::vector<int> index(order.begin() + begin, order.begin() + end);
      const Eigen::MatrixXd mb_obs = Columns(obs, index);
      SurrogateResult s = SurrogateLoss(
          learner.policy, mb_obs, Columns(actions, index),
          Entries(log_probs, index), Entries(advantages, index),
          cfg.clip_ratio, cfg.entropy_coef);
      ValueLossResult v =
          ValueLoss(learner.value, mb_obs, Entries(targets, index));
      if (!std::isfinite(s.loss) || !std::isfinite(v.loss) ||
          !s.grad.allFinite() || !v.grad.allFinite()) {
        learner = snapshot;
        stats.failure = "non-finite loss in epoch " + std::to_string(epoch);
        return stats;
      }
      ClipNorm(s.grad, cfg.max_grad_norm);
      ClipNorm(v.grad, cfg.max_grad_norm);
      AdamStep(learner.policy.params, learner.policy_adam, s.grad,
               cfg.policy_lr);
      AdamStep(learner.value.params, learner.value_adam, v.grad, cfg.value_lr);
      stats.policy_loss += s.loss;
      stats.value_loss += v.loss;
      stats.entropy += s.entropy;
      stats.approx_kl += s.approx_kl;
      stats.clip_fraction += s.clip_fraction;
      ++steps;
    }
  }
  if (!learner.policy.params.allFinite() || !learner.value.params.allFinite()) {
    learner = snapshot;
    stats.failure = "non-finite parameters after update";
    return stats;
  }
  stats.policy_loss /= steps;
  stats.value_loss /= steps;
  stats.entropy /= steps;
  stats.approx_kl /= steps;
  stats.clip_fraction /= steps;
  stats.applied = true;
  return stats;
}

Json PpoConfigToJson(const PpoConfig& cfg) {
  Json j;
  j["discount"] = cfg.discount;
  j["gae_lambda"] = cfg.gae_lambda;
  j["clip_ratio"] = cfg.clip_ratio;
  j["epochs"] = cfg.epochs;
  j["minibatches"] = cfg.minibatches;
  j["policy_lr"] = cfg.policy_lr;
  j["value_lr"] = cfg.value_lr;
  j["entropy_coef"] = cfg.entropy_coef;
  j["max_grad_norm"] = cfg.max_grad_norm;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  return j;
}

PpoConfig PpoConfigFromJson(const Json& j) {
  PpoConfig c;
  c.discount = j.value("discount", c.discount);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatches = j.value("minibatches", c.minibatches);
  c.policy_lr = j.value("policy_lr", c.policy_lr);
  c.value_lr = j.value("value_lr", c.value_lr);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.horizon = j.value("horizon", c.horizon);
  c.seed = j.value("seed", c.seed);
  c.Validate();
  return c;
}

Json AdamStateToJson(const AdamState& state) {
  Json j;
  j["first_moment"] = VectorToJson(state.first_moment);
  j["second_moment"] = VectorToJson(state.second_moment);
  j["step"] = state.step;
  return j;
}

AdamState AdamStateFromJson(const Json& j, Eigen::Index size) {
  AdamState s;
  s.first_moment = VectorFromJson(j.at("first_moment"), size);
  s.second_moment = VectorFromJson(j.at("second_moment"), size);
  s.step = j.at("step").get<long>();
  return s;
}

}  // namespace mmloco
