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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mmcm/clustering.hpp"
#include "mmcm/embedding.hpp"
#include "mmcm/metrics.hpp"
#include "mmcm/mmgt.hpp"

namespace mmcm {

struct PipelineConfig {
  std::string preset = "synthetic";
  int past_frames = 10;    // B
  int future_frames = 20;  // T
  WindowSpec window;       // future_frames is kept equal to T
  EncoderTrainOptions encoder;
  LayoutOptions layout;
  ClusterConfig cluster;
  MmgtConfig mmgt;
  double tau_margin = 0.1;
  int calibration_stride = 1;
  std::uint64_t seed = 0;

  // Preset defaults: h36m B=25, T=100; amass B=30, T=120; synthetic B=10,
  // T=20. Thresholds and cluster sizes follow the preset.
  static PipelineConfig for_preset(std::string_view preset);
  void validate() const;

  // Hash of every field that influences fitting or scoring.
  std::uint64_t fingerprint() const;
};

class FittedPipeline {
 public:
  PipelineConfig config;
  Skeleton skeleton = Skeleton::h36m();
  double frame_rate = 0.0;
  Embedder embedder;
  ModeTable modes;
  double tau = 0.0;
  std::uint64_t fingerprint = 0;

  // Nearest centroid in layout space, lowest id on ties; abnormal iff the
  // distance exceeds tau.
  ModeAssignment assign_point(const Vector& point) const;
  ModeAssignment assign_mode(std::span<const Pose> past, std::span<const Pose> future) const;
};

struct FitReport {
  EncoderTrainReport encoder;
  int window_count = 0;
  int mode_count = 0;
  double noise_rate = 0.0;
  double calibration_max = 0.0;
  double tau = 0.0;
};

// Trains the encoder, lays out the windows, fits modes and calibrates tau.
// Throws DegenerateError when clustering yields no mode.
FittedPipeline fit_pipeline(const MotionCorpus& corpus, const PipelineConfig& config,
                            FitReport* report = nullptr);

// Refits layout, modes and tau on an already trained encoder.
FittedPipeline refit_pipeline(const MotionCorpus& corpus, const PipelineConfig& config,
                              const EncoderModel& encoder, FitReport* report = nullptr);

// Largest nearest-centroid distance over the corpus windows mined at
// `stride`, times (1 + margin).
double calibrate_tau(const Embedder& embedder, const ModeTable& modes, const MotionCorpus& corpus,
                     double margin, int stride, double* observed_max = nullptr);

// Same, for windows already encoded to codes.
double calibrate_tau_codes(const LayoutModel& layout, const ModeTable& modes, const Matrix& codes,
                           double margin, double* observed_max = nullptr);

// Trains the encoder as fit_pipeline does and ranks alternative cluster
// configurations on the resulting layout. Used as a hint after a fit that
// produced no mode.
std::vector<StabilityRow> stability_report(const MotionCorpus& corpus, const PipelineConfig& config,
                                           std::span<const ClusterConfig> candidates);

// Versioned binary artifact; see docs/formats.md.
void save_pipeline(const FittedPipeline& pipeline, const std::filesystem::path& path);
FittedPipeline load_pipeline(const std::filesystem::path& path);

}  // namespace mmcm
