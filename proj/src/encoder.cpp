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

#include "mmcm/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mmcm/error.hpp"
#include "mmcm/rng.hpp"

namespace mmcm {
namespace {

void apply(Activation a, Matrix& z) {
  if (a == Activation::kTanh) z = z.array().tanh();
}

Matrix affine(const DenseLayer& layer, const Matrix& input) {
  Matrix z = input * layer.weights.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

struct Adam {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long step = 0;

  explicit Adam(const EncoderModel& m) {
    for (const auto& l : m.layers) {
      mw.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
      vw.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
      mb.push_back(Vector::Zero(l.bias.size()));
      vb.push_back(Vector::Zero(l.bias.size()));
    }
  }

  void update(EncoderModel& m, const Gradients& g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++step;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      mw[i] = b1 * mw[i] + (1 - b1) * g.weights[i];
      vw[i] = b2 * vw[i] + (1 - b2) * g.weights[i].cwiseAbs2();
      m.layers[i].weights.array() -=
          lr * (mw[i].array() / c1) / ((vw[i].array() / c2).sqrt() + eps);
      mb[i] = b1 * mb[i] + (1 - b1) * g.biases[i];
      vb[i] = b2 * vb[i] + (1 - b2) * g.biases[i].cwiseAbs2();
      m.layers[i].bias.array() -= lr * (mb[i].array() / c1) / ((vb[i].array() / c2).sqrt() + eps);
    }
  }
};

}  // namespace

int EncoderModel::input_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
}

int EncoderModel::latent_dim() const {
  return encoder_depth == 0 ? 0 : static_cast<int>(layers[encoder_depth - 1].weights.rows());
}

EncoderModel EncoderModel::initialize(int input_dim, std::span<const int> widths,
                                      std::uint64_t seed) {
  if (input_dim <= 0 || widths.empty()) throw InvalidArgument("encoder needs an input width and layers");
  for (int w : widths) {
    if (w <= 0) throw InvalidArgument("encoder layer widths must be positive");
  }
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), widths.begin(), widths.end());
  for (auto it = widths.rbegin() + 1; it != widths.rend(); ++it) sizes.push_back(*it);
  sizes.push_back(input_dim);

  EncoderModel m;
  m.encoder_depth = static_cast<int>(widths.size());
  m.input_mean = Vector::Zero(input_dim);
  m.input_scale = Vector::Ones(input_dim);
  Rng rng(derive_seed(seed, "encoder-init"));
  const int n_layers = static_cast<int>(sizes.size()) - 1;
  for (int i = 0; i < n_layers; ++i) {
    DenseLayer layer;
    const int in = sizes[i], out = sizes[i + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weights.resize(out, in);
    for (Eigen::Index j = 0; j < layer.weights.size(); ++j) layer.weights.data()[j] = dist(rng);
    layer.bias = Vector::Zero(out);
    const bool linear = i == m.encoder_depth - 1 || i == n_layers - 1;
    layer.activation = linear ? Activation::kIdentity : Activation::kTanh;
    m.layers.push_back(std::move(layer));
  }
  return m;
}

Matrix EncoderModel::standardize(const Matrix& windows) const {
  if (windows.cols() != input_dim()) {
    throw InvalidArgument("window width " + std::to_string(windows.cols()) +
                          " does not match encoder input width " + std::to_string(input_dim()));
  }
  Matrix out = windows.rowwise() - input_mean.transpose();
  out.array().rowwise() /= input_scale.transpose().array();
  return out;
}

// Rows are encoded one at a time so a window yields bit-identical codes
// whether it is encoded alone or as part of a batch.
Matrix EncoderModel::encode_batch(const Matrix& windows) const {
  if (windows.cols() != input_dim()) {
    throw InvalidArgument("window width " + std::to_string(windows.cols()) +
                          " does not match encoder input width " + std::to_string(input_dim()));
  }
  Matrix out(windows.rows(), latent_dim());
  const long n = static_cast<long>(windows.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out.row(i) = encode(windows.row(i).transpose()).transpose();
  return out;
}

Vector EncoderModel::encode(const Vector& window) const {
  if (window.size() != input_dim()) {
    throw InvalidArgument("window width " + std::to_string(window.size()) +
                          " does not match encoder input width " + std::to_string(input_dim()));
  }
  Vector a = (window - input_mean).cwiseQuotient(input_scale);
  for (int i = 0; i < encoder_depth; ++i) {
    Vector z = layers[i].weights * a + layers[i].bias;
    if (layers[i].activation == Activation::kTanh) z = z.array().tanh();
    a = std::move(z);
  }
  return a;
}

Matrix EncoderModel::reconstruct_batch(const Matrix& windows) const {
  Matrix a = standardize(windows);
  for (const auto& l : layers) {
    a = affine(l, a);
    apply(l.activation, a);
  }
  a.array().rowwise() *= input_scale.transpose().array();
  a.rowwise() += input_mean.transpose();
  return a;
}

double reconstruction_loss(const EncoderModel& model, const Matrix& standardized,
                           Gradients* grads) {
  const std::size_t n_layers = model.layers.size();
  std::vector<Matrix> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(standardized);
  for (const auto& l : model.layers) {
    Matrix z = affine(l, acts.back());
    apply(l.activation, z);
    acts.push_back(std::move(z));
  }
  const double count = static_cast<double>(standardized.rows()) * standardized.cols();
  Matrix diff = acts.back() - standardized;
  const double loss = diff.squaredNorm() / count;
  if (!grads) return loss;

  grads->weights.resize(n_layers);
  grads->biases.resize(n_layers);
  Matrix delta = (2.0 / count) * diff;
  for (std::size_t i = n_layers; i-- > 0;) {
    const DenseLayer& l = model.layers[i];
    if (l.activation == Activation::kTanh) {
      delta.array() *= 1.0 - acts[i + 1].array().square();
    }
    grads->weights[i] = delta.transpose() * acts[i];
    grads->biases[i] = delta.colwise().sum().transpose();
    if (i > 0) delta = delta * l.weights;
  }
  return loss;
}

double reconstruction_rmse(const EncoderModel& model, const Matrix& windows) {
  const Matrix rec = model.reconstruct_batch(windows);
  return std::sqrt((rec - windows).squaredNorm() / static_cast<double>(windows.size()));
}

EncoderModel train_encoder(const Matrix& windows, const EncoderTrainOptions& options,
                           EncoderTrainReport* report) {
  const Eigen::Index n = windows.rows();
  if (options.batch_size <= 0) throw InvalidArgument("batch size must be positive");
  if (n < 2 * options.batch_size) {
    throw InvalidArgument("encoder training needs at least 2 x batch_size = " +
                          std::to_string(2 * options.batch_size) + " rows, got " +
                          std::to_string(n));
  }
  if (options.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (!windows.allFinite()) throw InvalidArgument("training windows contain non-finite values");

  EncoderModel model =
      EncoderModel::initialize(static_cast<int>(windows.cols()), options.widths, options.seed);
  // Per-dimension mean and one shared scale, so Euclidean geometry between
  // windows is preserved up to a constant factor.
  model.input_mean = windows.colwise().mean().transpose();
  const double rms = std::sqrt((windows.rowwise() - model.input_mean.transpose()).squaredNorm() /
                               static_cast<double>(windows.size()));
  model.input_scale = Vector::Constant(windows.cols(), rms > 1e-12 ? rms : 1.0);

  const Matrix data = model.standardize(windows);
  Rng rng(derive_seed(options.seed, "encoder-shuffle"));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Adam adam(model);
  Gradients grads;
  Matrix batch;
  EncoderTrainReport local;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < n; start += options.batch_size) {
      const Eigen::Index rows = std::min<Eigen::Index>(options.batch_size, n - start);
      batch.resize(rows, data.cols());
      for (Eigen::Index r = 0; r < rows; ++r) batch.row(r) = data.row(order[start + r]);
      const double loss = reconstruction_loss(model, batch, &grads);
      if (!std::isfinite(loss)) {
        throw Error("encoder training diverged (non-finite loss) at epoch " + std::to_string(epoch));
      }
      adam.update(model, grads, options.learning_rate);
      sum += loss * static_cast<double>(rows);
      seen += rows;
    }
    local.epoch_loss.push_back(sum / static_cast<double>(seen));
  }
  local.final_rmse = reconstruction_rmse(model, windows);
  if (report) *report = std::move(local);
  return model;
}

}  // namespace mmcm
