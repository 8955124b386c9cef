/* Copyright 2026 The MMCM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmcm/motion.hpp"

namespace mmcm {

enum class Activation { kTanh, kIdentity };

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::kTanh;
};

// Fully-connected autoencoder. The first `encoder_depth` layers map the
// standardized input to the code; the rest mirror them back to the input
// width. Hidden layers use tanh, the code and output layers are linear.
struct EncoderModel {
  Vector input_mean;
  Vector input_scale;
  std::vector<DenseLayer> layers;
  int encoder_depth = 0;

  int input_dim() const;
  int latent_dim() const;

  // Glorot-uniform weights, zero biases, identity standardization.
  // `widths` are the encoder widths after the input, ending with the code
  // width, e.g. {512, 128, 64}.
  static EncoderModel initialize(int input_dim, std::span<const int> widths, std::uint64_t seed);

  Vector encode(const Vector& window) const;
  Matrix encode_batch(const Matrix& windows) const;
  Matrix reconstruct_batch(const Matrix& windows) const;
  Matrix standardize(const Matrix& windows) const;
};

inline constexpr int kDefaultEncoderWidths[] = {512, 128, 64};

struct EncoderTrainOptions {
  int epochs = 12;
  double learning_rate = 1e-3;
  int batch_size = 64;
  std::uint64_t seed = 0;
  std::vector<int> widths{512, 128, 64};
};

struct EncoderTrainReport {
  std::vector<double> epoch_loss;  // mean standardized MSE over each epoch
  double final_rmse = 0.0;         // reconstruction RMSE in input units
};

// Adam on mean squared reconstruction error. Deterministic for a fixed seed.
// Throws Error when the loss becomes non-finite, naming the epoch.
EncoderModel train_encoder(const Matrix& windows, const EncoderTrainOptions& options,
                           EncoderTrainReport* report = nullptr);

// Per-layer parameter gradients, same shapes as the layers.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Mean over rows and columns of (reconstruction - input)^2 for an already
// standardized batch. Fills `grads` when non-null.
double reconstruction_loss(const EncoderModel& model, const Matrix& standardized,
                           Gradients* grads = nullptr);

// Reconstruction RMSE in input units.
double reconstruction_rmse(const EncoderModel& model, const Matrix& windows);

}  // namespace mmcm
