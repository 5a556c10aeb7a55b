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

#ifndef MMLOCO_MODE_ENCODER_H_
#define MMLOCO_MODE_ENCODER_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mmloco/io.h"
#include "mmloco/lstm.h"
#include "mmloco/refmotion.h"

namespace mmloco {

inline constexpr int kDefaultHiddenSize = 32;
inline constexpr int kDefaultLatentDim = 4;

// Recurrent encoder: LSTM over the trajectory, latent = projection * h_T.
struct EncoderParams {
  LstmParams lstm;
  Eigen::MatrixXd projection;  // n_m x H, no bias

  int latent_dim() const { return static_cast<int>(projection.rows()); }
};

// Recurrent decoder fed the repeated latent; output = projection * h_t.
struct DecoderParams {
  LstmParams lstm;
  Eigen::MatrixXd projection;  // D x H, no bias

  int output_dim() const { return static_cast<int>(projection.rows()); }
};

// Per-channel affine map raw -> (raw - mean) / scale.
struct Normalization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Normalization Identity(int channels);
  // Mean and standard deviation over every sample of the library; channels
  // with zero spread get scale 1.
  static Normalization FromLibrary(const ModeLibrary& library);

  Eigen::MatrixXd Apply(const Eigen::MatrixXd& raw) const;   // T x D
  Eigen::MatrixXd Invert(const Eigen::MatrixXd& norm) const;  // T x D
};

struct EncoderTrainConfig {
  double learning_rate = 5e-3;
  int epochs = 5000;
  // Reject any step that raises the loss and halve the step size instead of
  // keeping the best iterate of a free-running Adam.
  bool strict_monotone = false;
  std::uint64_t seed = 0;
  int hidden_size = kDefaultHiddenSize;
  int latent_dim = kDefaultLatentDim;
  // Filled by TrainAutoencoder from the library.
  Normalization normalization;
};

struct EncoderModel {
  EncoderParams encoder;
  DecoderParams decoder;
  Normalization normalization;
};

EncoderParams ZeroEncoder(int input_dim, int hidden, int latent_dim);
DecoderParams ZeroDecoder(int latent_dim, int hidden, int output_dim);
EncoderParams RandomEncoder(int input_dim, int hidden, int latent_dim, Rng& rng);
DecoderParams RandomDecoder(int latent_dim, int hidden, int output_dim,
                            Rng& rng);

// Sequence-level routines on already-normalized T x D matrices.
Eigen::VectorXd EncodeSequence(const EncoderParams& params,
                               const Eigen::MatrixXd& sequence);
Eigen::MatrixXd DecodeSequence(const DecoderParams& params,
                               const Eigen::VectorXd& z, int length);

// Model-level routines on raw reference motions.
LatentMode Encode(const EncoderModel& model, const ReferenceMotion& motion);
// Throws InvalidInput when length < 1.
Eigen::MatrixXd Decode(const EncoderModel& model, const LatentMode& latent,
                       int length);

// Mean squared error over all entries. Throws InvalidInput on shape mismatch.
double ReconstructionLoss(const Eigen::MatrixXd& target,
                          const Eigen::MatrixXd& reconstruction);

struct AutoencoderGradient {
  double loss = 0.0;
  EncoderParams encoder;
  DecoderParams decoder;
};

// Loss (mean of per-sequence MSE over `batch`) and its exact gradient by
// backpropagation through time through decoder and encoder.
AutoencoderGradient EncoderGradient(const EncoderParams& encoder,
                                    const DecoderParams& decoder,
                                    std::span<const Eigen::MatrixXd> batch);

// Flat views used by the optimizer and finite-difference checks.
Eigen::VectorXd Flatten(const EncoderParams& encoder,
                        const DecoderParams& decoder);
void Unflatten(const Eigen::VectorXd& flat, EncoderParams& encoder,
               DecoderParams& decoder);

struct EncoderTrainResult {
  EncoderModel model;
  ModeLibrary library;               // input library with latents filled
  // Loss of the returned model had training stopped after each epoch;
  // [0] = initial. Never increases.
  std::vector<double> loss_history;
  // Loss of the optimizer's current iterate.
  std::vector<double> iterate_loss_history;
  std::vector<double> learning_rate_history;
  double final_loss = 0.0;
  int rejected_steps = 0;
};

// Full-batch Adam on the normalized library. By default the optimizer runs
// freely and the best iterate seen is returned. With strict_monotone a step
// that raises the loss by more than 1e-9 is rolled back and the step size
// halved. Throws TrainingFailure on a non-finite loss.
EncoderTrainResult TrainAutoencoder(const ModeLibrary& library,
                                    EncoderTrainConfig cfg);

Json EncoderModelToJson(const EncoderModel& model);
EncoderModel EncoderModelFromJson(const Json& j);

}  // namespace mmloco

#endif  // MMLOCO_MODE_ENCODER_H_
