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

#include "mmloco/mode_encoder.h"

#include <cmath>
#include <string>
#include <utility>

#include "mmloco/adam.h"
#include "mmloco/common.h"

namespace mmloco {
namespace {

constexpr double kMonotoneTolerance = 1e-9;

Eigen::MatrixXd RandomMatrix(int rows, int cols, double bound, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = bound * (2.0 * rng.Uniform() - 1.0);
  }
  return m;
}

template <typename F>
void ForEachBlock(EncoderParams& e, DecoderParams& d, F&& f) {
  f(e.lstm.w_input);
  f(e.lstm.w_hidden);
  f(e.lstm.bias);
  f(e.projection);
  f(d.lstm.w_input);
  f(d.lstm.w_hidden);
  f(d.lstm.bias);
  f(d.projection);
}

Json LstmToJson(const LstmParams& p) {
  return Json{{"w_input", MatrixToJson(p.w_input)},
              {"w_hidden", MatrixToJson(p.w_hidden)},
              {"bias", MatrixToJson(p.bias)}};
}

LstmParams LstmFromJson(const Json& j) {
  LstmParams p;
  p.w_input = MatrixFromJson(j.at("w_input"));
  p.w_hidden = MatrixFromJson(j.at("w_hidden"));
  p.bias = MatrixFromJson(j.at("bias"));
  const auto H4 = p.w_hidden.rows();
  if (H4 % 4 != 0 || p.w_hidden.cols() * 4 != H4 || p.w_input.rows() != H4 ||
      p.bias.rows() != H4 || p.bias.cols() != 1) {
    throw InvalidInput("inconsistent LSTM shapes in encoder file");
  }
  return p;
}

}  // namespace

Normalization Normalization::Identity(int channels) {
  return {Eigen::VectorXd::Zero(channels), Eigen::VectorXd::Ones(channels)};
}

Normalization Normalization::FromLibrary(const ModeLibrary& library) {
  if (library.empty()) throw InvalidInput("library is empty");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(kRefChannels);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(kRefChannels);
  double count = 0.0;
  for (const auto& e : library.entries()) {
    sum += e.motion.samples.colwise().sum().transpose();
    count += e.motion.length();
  }
  const Eigen::VectorXd mean = sum / count;
  for (const auto& e : library.entries()) {
    sq += (e.motion.samples.rowwise() - mean.transpose())
              .cwiseAbs2()
              .colwise()
              .sum()
              .transpose();
  }
  Eigen::VectorXd scale = (sq / count).cwiseSqrt();
  for (Eigen::Index c = 0; c < scale.size(); ++c) {
    if (!(scale[c] > 1e-12)) scale[c] = 1.0;
  }
  return {mean, scale};
}

Eigen::MatrixXd Normalization::Apply(const Eigen::MatrixXd& raw) const {
  return (raw.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

Eigen::MatrixXd Normalization::Invert(const Eigen::MatrixXd& norm) const {
  return (norm.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
         mean.transpose();
}

EncoderParams ZeroEncoder(int input_dim, int hidden, int latent_dim) {
  return {LstmParams::Zero(input_dim, hidden),
          Eigen::MatrixXd::Zero(latent_dim, hidden)};
}

DecoderParams ZeroDecoder(int latent_dim, int hidden, int output_dim) {
  return {LstmParams::Zero(latent_dim, hidden),
          Eigen::MatrixXd::Zero(output_dim, hidden)};
}

EncoderParams RandomEncoder(int input_dim, int hidden, int latent_dim,
                            Rng& rng) {
  EncoderParams p;
  p.lstm = LstmParams::Random(input_dim, hidden, rng);
  p.projection = RandomMatrix(latent_dim, hidden, 1.0 / std::sqrt(hidden), rng);
  return p;
}

DecoderParams RandomDecoder(int latent_dim, int hidden, int output_dim,
                            Rng& rng) {
  DecoderParams p;
  p.lstm = LstmParams::Random(latent_dim, hidden, rng);
  p.projection = RandomMatrix(output_dim, hidden, 1.0 / std::sqrt(hidden), rng);
  return p;
}

Eigen::VectorXd EncodeSequence(const EncoderParams& params,
                               const Eigen::MatrixXd& sequence) {
  if (sequence.cols() != params.lstm.input_dim()) {
    throw InvalidInput("trajectory has " + std::to_string(sequence.cols()) +
                       " channels, encoder expects " +
                       std::to_string(params.lstm.input_dim()));
  }
  if (sequence.rows() < 1) throw InvalidInput("empty trajectory");
  const LstmTrace tr = LstmForward(params.lstm, sequence.transpose());
  return params.projection * tr.hidden.col(tr.steps() - 1);
}

Eigen::MatrixXd DecodeSequence(const DecoderParams& params,
                               const Eigen::VectorXd& z, int length) {
  if (length < 1) throw InvalidInput("decode length must be >= 1");
  if (z.size() != params.lstm.input_dim()) {
    throw InvalidInput("latent length does not match decoder");
  }
  const LstmTrace tr = LstmForward(params.lstm, z.replicate(1, length));
  return (params.projection * tr.hidden).transpose();
}

LatentMode Encode(const EncoderModel& model, const ReferenceMotion& motion) {
  if (motion.samples.cols() != model.normalization.mean.size()) {
    throw InvalidInput("motion channel count does not match encoder");
  }
  return {EncodeSequence(model.encoder,
                         model.normalization.Apply(motion.samples)),
          motion.name};
}

Eigen::MatrixXd Decode(const EncoderModel& model, const LatentMode& latent,
                       int length) {
  return model.normalization.Invert(
      DecodeSequence(model.decoder, latent.z, length));
}

double ReconstructionLoss(const Eigen::MatrixXd& target,
                          const Eigen::MatrixXd& reconstruction) {
  if (target.rows() != reconstruction.rows() ||
      target.cols() != reconstruction.cols()) {
    throw InvalidInput("reconstruction shape does not match target");
  }
  if (target.size() == 0) throw InvalidInput("empty trajectory");
  return (target - reconstruction).squaredNorm() /
         static_cast<double>(target.size());
}

AutoencoderGradient EncoderGradient(const EncoderParams& encoder,
                                    const DecoderParams& decoder,
                                    std::span<const Eigen::MatrixXd> batch) {
  const int H_enc = encoder.lstm.hidden_dim();
  AutoencoderGradient out;
  out.encoder = ZeroEncoder(encoder.lstm.input_dim(), H_enc,
                            encoder.latent_dim());
  out.decoder = ZeroDecoder(decoder.lstm.input_dim(),
                            decoder.lstm.hidden_dim(), decoder.output_dim());
  const double batch_weight = 1.0 / static_cast<double>(batch.size());

  for (const Eigen::MatrixXd& seq : batch) {
    const int T = static_cast<int>(seq.rows());
    const Eigen::MatrixXd inputs = seq.transpose();
    const LstmTrace enc = LstmForward(encoder.lstm, inputs);
    const Eigen::VectorXd h_last = enc.hidden.col(T - 1);
    const Eigen::VectorXd z = encoder.projection * h_last;

    const Eigen::MatrixXd dec_in = z.replicate(1, T);
    const LstmTrace dec = LstmForward(decoder.lstm, dec_in);
    const Eigen::MatrixXd diff = decoder.projection * dec.hidden - inputs;
    const double weight = batch_weight / static_cast<double>(diff.size());
    out.loss += weight * diff.squaredNorm();

    const Eigen::MatrixXd d_out = 2.0 * weight * diff;
    out.decoder.projection += d_out * dec.hidden.transpose();
    const LstmGradient dg =
        LstmBackward(decoder.lstm, dec, dec_in,
                     decoder.projection.transpose() * d_out);
    out.decoder.lstm += dg.params;

    const Eigen::VectorXd dz = dg.inputs.rowwise().sum();
    out.encoder.projection += dz * h_last.transpose();
    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(H_enc, T);
    dh.col(T - 1) = encoder.projection.transpose() * dz;
    out.encoder.lstm += LstmBackward(encoder.lstm, enc, inputs, dh).params;
  }
  return out;
}

Eigen::VectorXd Flatten(const EncoderParams& encoder,
                        const DecoderParams& decoder) {
  EncoderParams e = encoder;
  DecoderParams d = decoder;
  Eigen::Index total = 0;
  ForEachBlock(e, d, [&](auto& m) { total += m.size(); });
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  ForEachBlock(e, d, [&](auto& m) {
    flat.segment(at, m.size()) =
        Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  });
  return flat;
}

void Unflatten(const Eigen::VectorXd& flat, EncoderParams& encoder,
               DecoderParams& decoder) {
  Eigen::Index at = 0;
  ForEachBlock(encoder, decoder, [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) =
        flat.segment(at, m.size());
    at += m.size();
  });
}

EncoderTrainResult TrainAutoencoder(const ModeLibrary& library,
                                    EncoderTrainConfig cfg) {
  if (library.empty()) throw InvalidInput("library is empty");
  if (!(cfg.learning_rate > 0.0)) {
    throw InvalidInput("learning rate must be positive");
  }
  if (cfg.epochs < 0 || cfg.hidden_size < 1 || cfg.latent_dim < 1) {
    throw InvalidInput("invalid encoder training configuration");
  }
  cfg.normalization = Normalization::FromLibrary(library);

  std::vector<Eigen::MatrixXd> batch;
  for (const auto& e : library.entries()) {
    batch.push_back(cfg.normalization.Apply(e.motion.samples));
  }

  Rng rng(cfg.seed);
  EncoderModel model;
  model.normalization = cfg.normalization;
  model.encoder =
      RandomEncoder(kRefChannels, cfg.hidden_size, cfg.latent_dim, rng);
  model.decoder =
      RandomDecoder(cfg.latent_dim, cfg.hidden_size, kRefChannels, rng);

  Eigen::VectorXd params = Flatten(model.encoder, model.decoder);
  AdamState adam = AdamState::Zero(params.size());
  AutoencoderGradient current =
      EncoderGradient(model.encoder, model.decoder, batch);
  if (!std::isfinite(current.loss)) {
    throw TrainingFailure("autoencoder loss is not finite at initialization");
  }

  EncoderTrainResult result;
  result.loss_history.push_back(current.loss);
  result.iterate_loss_history.push_back(current.loss);
  double lr = cfg.learning_rate;
  EncoderParams trial_enc = model.encoder;
  DecoderParams trial_dec = model.decoder;
  Eigen::VectorXd best = params;
  double best_loss = current.loss;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Eigen::VectorXd trial = params;
    AdamState trial_adam = adam;
    AdamStep(trial, trial_adam, Flatten(current.encoder, current.decoder), lr);
    Unflatten(trial, trial_enc, trial_dec);
    AutoencoderGradient next = EncoderGradient(trial_enc, trial_dec, batch);
    if (!cfg.strict_monotone) {
      if (!std::isfinite(next.loss)) {
        throw TrainingFailure("autoencoder loss became non-finite at epoch " +
                              std::to_string(epoch) + " (previous loss " +
                              std::to_string(current.loss) + ", lr " +
                              std::to_string(lr) + ")");
      }
      params = std::move(trial);
      adam = std::move(trial_adam);
      current = std::move(next);
      if (current.loss < best_loss) {
        best_loss = current.loss;
        best = params;
      }
    } else if (std::isfinite(next.loss) &&
               next.loss <= current.loss + kMonotoneTolerance) {
      params = std::move(trial);
      adam = std::move(trial_adam);
      current = std::move(next);
      lr = std::min(cfg.learning_rate, lr * 1.2);
      best = params;
      best_loss = current.loss;
    } else {
      ++result.rejected_steps;
      lr *= 0.5;
      if (lr < cfg.learning_rate * 1e-12) {
        throw TrainingFailure(
            "autoencoder step size collapsed at epoch " +
            std::to_string(epoch) + " (loss " + std::to_string(current.loss) +
            ", trial loss " + std::to_string(next.loss) + ")");
      }
    }
    result.loss_history.push_back(best_loss);
    result.iterate_loss_history.push_back(current.loss);
    result.learning_rate_history.push_back(lr);
  }

  params = std::move(best);
  current.loss = best_loss;
  Unflatten(params, model.encoder, model.decoder);
  result.final_loss = current.loss;
  result.library = library;
  for (int i = 0; i < library.size(); ++i) {
    result.library.SetLatent(i, Encode(model, library.motion(i)));
  }
  result.model = std::move(model);
  return result;
}

Json EncoderModelToJson(const EncoderModel& model) {
  Json j;
  j["input_dim"] = model.encoder.lstm.input_dim();
  j["hidden_size"] = model.encoder.lstm.hidden_dim();
  j["latent_dim"] = model.encoder.latent_dim();
  j["encoder"] = LstmToJson(model.encoder.lstm);
  j["encoder"]["projection"] = MatrixToJson(model.encoder.projection);
  j["decoder"] = LstmToJson(model.decoder.lstm);
  j["decoder"]["projection"] = MatrixToJson(model.decoder.projection);
  j["normalization"] = {{"mean", VectorToJson(model.normalization.mean)},
                        {"scale", VectorToJson(model.normalization.scale)}};
  return j;
}

EncoderModel EncoderModelFromJson(const Json& j) {
  try {
    EncoderModel m;
    m.encoder.lstm = LstmFromJson(j.at("encoder"));
    m.encoder.projection = MatrixFromJson(j.at("encoder").at("projection"));
    m.decoder.lstm = LstmFromJson(j.at("decoder"));
    m.decoder.projection = MatrixFromJson(j.at("decoder").at("projection"));
    const int D = j.at("input_dim").get<int>();
    m.normalization.mean = VectorFromJson(j.at("normalization").at("mean"), D);
    m.normalization.scale =
        VectorFromJson(j.at("normalization").at("scale"), D);
    if (m.encoder.lstm.input_dim() != D || m.decoder.output_dim() != D ||
        m.encoder.projection.cols() != m.encoder.lstm.hidden_dim() ||
        m.decoder.lstm.input_dim() != m.encoder.latent_dim() ||
        m.decoder.projection.cols() != m.decoder.lstm.hidden_dim()) {
      throw InvalidInput("inconsistent encoder/decoder shapes");
    }
    if ((m.normalization.scale.array() <= 0.0).any()) {
      throw InvalidInput("normalization scale must be positive");
    }
    return m;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed encoder file: ") + e.what());
  }
}

}  // namespace mmloco
