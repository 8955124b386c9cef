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

#include "mmcm/pipeline.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mmcm/corpus_io.hpp"
#include "mmcm/error.hpp"
#include "mmcm/rng.hpp"

namespace mmcm {
namespace {

// Per-stage seeds come from the master seed; the window spec follows T.
PipelineConfig resolved(const PipelineConfig& in) {
  PipelineConfig c = in;
  c.window.future_frames = c.future_frames;
  c.encoder.seed = derive_seed(c.seed, "encoder");
  c.layout.seed = derive_seed(c.seed, "layout");
  return c;
}

void write_matrix(ByteWriter& w, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

Matrix read_matrix(ByteReader& r) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  if (static_cast<std::uint64_t>(rows) * cols > r.remaining() / 8) {
    r.fail(FormatError::Kind::kTruncated, "matrix of " + std::to_string(rows) + " x " +
                                              std::to_string(cols) + " exceeds file size");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
  return m;
}

void write_vector(ByteWriter& w, const Vector& v) {
  w.f64s(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Vector read_vector(ByteReader& r) {
  const std::vector<double> v = r.f64s();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_config(ByteWriter& w, const PipelineConfig& c) {
  w.str(c.preset);
  w.i32(c.past_frames);
  w.i32(c.future_frames);
  w.i32(c.window.past_tail_frames);
  w.i32(c.window.future_frames);
  w.i32(c.window.stride);
  w.i32(c.encoder.epochs);
  w.f64(c.encoder.learning_rate);
  w.i32(c.encoder.batch_size);
  w.u64(c.encoder.seed);
  w.u32(static_cast<std::uint32_t>(c.encoder.widths.size()));
  for (int x : c.encoder.widths) w.i32(x);
  w.i32(c.layout.n_neighbors);
  w.f64(c.layout.min_dist);
  w.f64(c.layout.spread);
  w.i32(c.layout.dims);
  w.i32(c.layout.epochs);
  w.i32(c.layout.negative_sample_rate);
  w.f64(c.layout.learning_rate);
  w.i32(c.layout.transform_epochs);
  w.u64(c.layout.seed);
  w.i32(c.cluster.min_cluster_size);
  w.i32(c.cluster.min_samples);
  w.i32(c.mmgt.past_window_frames);
  w.f64(c.mmgt.similarity_threshold);
  w.u8(c.mmgt.include_self ? 1 : 0);
  w.u8(c.mmgt.root_relative ? 1 : 0);
  w.f64(c.tau_margin);
  w.i32(c.calibration_stride);
  w.u64(c.seed);
}

PipelineConfig read_config(ByteReader& r) {
  PipelineConfig c;
  c.preset = r.str();
  c.past_frames = r.i32();
  c.future_frames = r.i32();
  c.window.past_tail_frames = r.i32();
  c.window.future_frames = r.i32();
  c.window.stride = r.i32();
  c.encoder.epochs = r.i32();
  c.encoder.learning_rate = r.f64();
  c.encoder.batch_size = r.i32();
  c.encoder.seed = r.u64();
  const std::uint32_t widths = r.u32();
  if (widths > 64) r.fail(FormatError::Kind::kContent, "implausible encoder depth");
  c.encoder.widths.resize(widths);
  for (auto& x : c.encoder.widths) x = r.i32();
  c.layout.n_neighbors = r.i32();
  c.layout.min_dist = r.f64();
  c.layout.spread = r.f64();
  c.layout.dims = r.i32();
  c.layout.epochs = r.i32();
  c.layout.negative_sample_rate = r.i32();
  c.layout.learning_rate = r.f64();
  c.layout.transform_epochs = r.i32();
  c.layout.seed = r.u64();
  c.cluster.min_cluster_size = r.i32();
  c.cluster.min_samples = r.i32();
  c.mmgt.past_window_frames = r.i32();
  c.mmgt.similarity_threshold = r.f64();
  c.mmgt.include_self = r.u8() != 0;
  c.mmgt.root_relative = r.u8() != 0;
  c.tau_margin = r.f64();
  c.calibration_stride = r.i32();
  c.seed = r.u64();
  return c;
}

}  // namespace

PipelineConfig PipelineConfig::for_preset(std::string_view preset) {
  Skeleton::from_preset(preset);
  PipelineConfig c;
  c.preset = std::string(preset);
  if (preset == "h36m") {
    c.past_frames = 25;
    c.future_frames = 100;
  } else if (preset == "amass") {
    c.past_frames = 30;
    c.future_frames = 120;
  }
  c.window.future_frames = c.future_frames;
  c.cluster = ClusterConfig::for_preset(preset);
  c.mmgt = MmgtConfig::for_preset(preset);
  return c;
}

void PipelineConfig::validate() const {
  Skeleton::from_preset(preset);
  if (past_frames < 1) throw ConfigError("B (past_frames) must be at least 1");
  if (future_frames < 1) throw ConfigError("T (future_frames) must be at least 1");
  if (window.past_tail_frames > past_frames) {
    throw ConfigError("N'_p (past_tail_frames) = " + std::to_string(window.past_tail_frames) +
                      " exceeds B = " + std::to_string(past_frames));
  }
  try {
    WindowSpec w = window;
    w.future_frames = future_frames;
    w.validate();
    layout.validate();
    cluster.validate();
    mmgt.validate(past_frames);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (encoder.epochs < 0) throw ConfigError("encoder epochs must be non-negative");
  if (encoder.batch_size < 1) throw ConfigError("encoder batch size must be positive");
  if (!(encoder.learning_rate > 0.0)) throw ConfigError("encoder learning rate must be positive");
  if (encoder.widths.empty()) throw ConfigError("encoder needs at least one layer");
  if (!(tau_margin >= 0.0) || !std::isfinite(tau_margin)) throw ConfigError("tau margin must be >= 0");
  if (calibration_stride < 1) throw ConfigError("calibration stride must be at least 1");
}

std::uint64_t PipelineConfig::fingerprint() const {
  ByteWriter w;
  write_config(w, resolved(*this));
  const auto& b = w.bytes();
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
}

ModeAssignment FittedPipeline::assign_point(const Vector& point) const {
  if (modes.empty()) throw DegenerateError("pipeline has no modes");
  ModeAssignment a;
  a.point = point;
  a.distance = std::numeric_limits<double>::infinity();
  int best = -1;
  for (const auto& m : modes.modes) {
    const double d = (point - m.centroid).norm();
    if (d < a.distance) {
      a.distance = d;
      best = m.id;
    }
  }
  a.mode = a.distance > tau ? kAbnormal : best;
  return a;
}

ModeAssignment FittedPipeline::assign_mode(std::span<const Pose> past,
                                           std::span<const Pose> future) const {
  return assign_point(embedder.embed(past, future));
}

double calibrate_tau_codes(const LayoutModel& layout, const ModeTable& modes, const Matrix& codes,
                           double margin, double* observed_max) {
  if (modes.empty()) throw DegenerateError("cannot calibrate tau without modes");
  const long n = static_cast<long>(codes.rows());
  if (n == 0) throw InvalidArgument("no calibration windows");
  double worst = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : worst)
  for (long i = 0; i < n; ++i) {
    const Vector p = layout.transform(codes.row(i).transpose());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : modes.modes) best = std::min(best, (p - m.centroid).norm());
    worst = std::max(worst, best);
  }
  if (observed_max) *observed_max = worst;
  if (!(worst > 0.0)) throw DegenerateError("calibration windows all sit on mode centroids");
  return (1.0 + margin) * worst;
}

double calibrate_tau(const Embedder& embedder, const ModeTable& modes, const MotionCorpus& corpus,
                     double margin, int stride, double* observed_max) {
  if (modes.empty()) throw DegenerateError("cannot calibrate tau without modes");
  WindowSpec spec = embedder.spec;
  spec.stride = stride;
  const MinedWindows windows = mine_windows(corpus, spec);
  const Matrix codes = embedder.encoder.encode_batch(windows.rows);
  return calibrate_tau_codes(embedder.layout, modes, codes, margin, observed_max);
}

FittedPipeline refit_pipeline(const MotionCorpus& corpus, const PipelineConfig& config,
                              const EncoderModel& encoder, FitReport* report) {
  config.validate();
  const PipelineConfig c = resolved(config);
  corpus.validate(c.window.window_frames());
  if (!(corpus.skeleton == Skeleton::from_preset(c.preset))) {
    throw InvalidArgument("corpus skeleton does not match preset '" + c.preset + "'");
  }
  FittedPipeline p;
  p.config = c;
  p.skeleton = corpus.skeleton;
  p.frame_rate = corpus.frame_rate;
  p.embedder.spec = c.window;
  p.embedder.encoder = encoder;
  const MinedWindows windows = mine_windows(corpus, c.window);
  const Matrix codes = encoder.encode_batch(windows.rows);
  p.embedder.layout = fit_layout(codes, c.layout);
  p.modes = fit_modes(p.embedder.layout, c.cluster);
  if (p.modes.empty()) {
    throw DegenerateError("clustering produced no modes (noise rate " +
                          std::to_string(p.modes.noise_rate()) +
                          "); try a smaller min_cluster_size or run the stability sweep");
  }
  double observed = 0.0;
  p.tau = calibrate_tau(p.embedder, p.modes, corpus, c.tau_margin, c.calibration_stride, &observed);
  p.fingerprint = c.fingerprint();
  if (report) {
    report->window_count = static_cast<int>(windows.rows.rows());
    report->mode_count = p.modes.mode_count();
    report->noise_rate = p.modes.noise_rate();
    report->calibration_max = observed;
    report->tau = p.tau;
  }
  return p;
}

FittedPipeline fit_pipeline(const MotionCorpus& corpus, const PipelineConfig& config,
                            FitReport* report) {
  config.validate();
  const PipelineConfig c = resolved(config);
  corpus.validate(c.window.window_frames());
  const MinedWindows windows = mine_windows(corpus, c.window);
  EncoderTrainReport enc;
  const EncoderModel encoder = train_encoder(windows.rows, c.encoder, &enc);
  FittedPipeline p = refit_pipeline(corpus, config, encoder, report);
  if (report) report->encoder = std::move(enc);
  return p;
}

std::vector<StabilityRow> stability_report(const MotionCorpus& corpus, const PipelineConfig& config,
                                           std::span<const ClusterConfig> candidates) {
  config.validate();
  const PipelineConfig c = resolved(config);
  corpus.validate(c.window.window_frames());
  const MinedWindows windows = mine_windows(corpus, c.window);
  const EncoderModel encoder = train_encoder(windows.rows, c.encoder);
  const int dims[] = {c.layout.dims};
  return sweep_stability(encoder.encode_batch(windows.rows), candidates, dims, c.layout);
}

// Artifact layout after the container header:
//   u64 fingerprint, config block, encoder block, layout block, mode block,
//   f64 tau, u64 FNV-1a checksum of every preceding byte.
void save_pipeline(const FittedPipeline& p, const std::filesystem::path& path) {
  ByteWriter w;
  write_container_header(w, {ContainerKind::kPipeline, p.skeleton, p.frame_rate});
  w.u64(p.fingerprint);
  write_config(w, p.config);

  const EncoderModel& e = p.embedder.encoder;
  w.u32(static_cast<std::uint32_t>(e.encoder_depth));
  w.u32(static_cast<std::uint32_t>(e.layers.size()));
  write_vector(w, e.input_mean);
  write_vector(w, e.input_scale);
  for (const auto& l : e.layers) {
    w.u8(l.activation == Activation::kTanh ? 0 : 1);
    write_matrix(w, l.weights);
    write_vector(w, l.bias);
  }

  const LayoutModel& lm = p.embedder.layout;
  write_matrix(w, lm.codes);
  write_matrix(w, lm.layout);
  w.f64(lm.curve.a);
  w.f64(lm.curve.b);
  w.f64(lm.support_radius);

  const ModeTable& t = p.modes;
  w.u32(static_cast<std::uint32_t>(t.point_count));
  for (int l : t.labels) w.i32(l);
  w.u32(static_cast<std::uint32_t>(t.modes.size()));
  for (const auto& m : t.modes) {
    w.i32(m.id);
    w.u32(static_cast<std::uint32_t>(m.members.size()));
    for (int x : m.members) w.i32(x);
    write_vector(w, m.centroid);
    w.f64(m.persistence);
  }
  w.u32(static_cast<std::uint32_t>(t.condensed.size()));
  for (const auto& c : t.condensed) {
    w.i32(c.parent);
    w.i32(c.child);
    w.f64(c.lambda);
    w.i32(c.child_size);
  }
  w.f64(p.tau);
  const auto& b = w.bytes();
  w.u64(fnv1a64(std::string_view(reinterpret_cast<const char*>(b.data()), b.size())));
  write_file_atomic(path, w.bytes());
}

FittedPipeline load_pipeline(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() >= 8) {
    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 7; i >= 0; --i) stored = (stored << 8) | bytes[body + i];
    const std::uint64_t actual =
        fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), body));
    if (stored != actual) {
      // Decode first so structural problems are reported with their offset.
      ByteReader probe(bytes);
      read_container_header(probe, ContainerKind::kPipeline);
      throw FormatError(FormatError::Kind::kContent, body, "pipeline checksum mismatch");
    }
  }
  ByteReader r(std::move(bytes));
  const ContainerHeader h = read_container_header(r, ContainerKind::kPipeline);
  FittedPipeline p;
  p.skeleton = h.skeleton;
  p.frame_rate = h.frame_rate;
  p.fingerprint = r.u64();
  p.config = read_config(r);
  if (p.config.fingerprint() != p.fingerprint) {
    r.fail(FormatError::Kind::kContent, "pipeline fingerprint does not match its configuration");
  }
  p.embedder.spec = p.config.window;

  EncoderModel& e = p.embedder.encoder;
  e.encoder_depth = static_cast<int>(r.u32());
  const std::uint32_t n_layers = r.u32();
  if (n_layers > 128 || e.encoder_depth < 1 || static_cast<std::uint32_t>(e.encoder_depth) >= n_layers) {
    r.fail(FormatError::Kind::kContent, "implausible encoder layer count");
  }
  e.input_mean = read_vector(r);
  e.input_scale = read_vector(r);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    DenseLayer l;
    l.activation = r.u8() == 0 ? Activation::kTanh : Activation::kIdentity;
    l.weights = read_matrix(r);
    l.bias = read_vector(r);
    e.layers.push_back(std::move(l));
  }

  LayoutModel& lm = p.embedder.layout;
  lm.options = p.config.layout;
  lm.codes = read_matrix(r);
  lm.layout = read_matrix(r);
  lm.curve.a = r.f64();
  lm.curve.b = r.f64();
  lm.support_radius = r.f64();

  ModeTable& t = p.modes;
  t.point_count = static_cast<int>(r.u32());
  if (static_cast<std::uint64_t>(t.point_count) > r.remaining() / 4) {
    r.fail(FormatError::Kind::kTruncated, "label table exceeds file size");
  }
  t.labels.resize(t.point_count);
  for (auto& l : t.labels) l = r.i32();
  const std::uint32_t n_modes = r.u32();
  for (std::uint32_t i = 0; i < n_modes; ++i) {
    Mode m;
    m.id = r.i32();
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / 4) r.fail(FormatError::Kind::kTruncated, "member list exceeds file size");
    m.members.resize(n);
    for (auto& x : m.members) x = r.i32();
    m.centroid = read_vector(r);
    m.persistence = r.f64();
    t.modes.push_back(std::move(m));
  }
  const std::uint32_t n_condensed = r.u32();
  if (n_condensed > r.remaining() / 20) r.fail(FormatError::Kind::kTruncated, "condensed tree exceeds file size");
  t.condensed.resize(n_condensed);
  for (auto& c : t.condensed) {
    c.parent = r.i32();
    c.child = r.i32();
    c.lambda = r.f64();
    c.child_size = r.i32();
  }
  p.tau = r.f64();
  r.u64();  // checksum, verified above
  if (!r.at_end()) r.fail(FormatError::Kind::kContent, "unexpected trailing bytes");
  if (lm.layout.rows() != lm.codes.rows() || t.point_count != lm.layout.rows()) {
    throw FormatError(FormatError::Kind::kContent, r.offset(), "layout and mode table sizes disagree");
  }
  if (e.input_dim() != p.embedder.spec.window_frames() * p.skeleton.keypoint_count() * 3) {
    throw FormatError(FormatError::Kind::kContent, r.offset(), "encoder width does not match window shape");
  }
  return p;
}

}  // namespace mmcm
