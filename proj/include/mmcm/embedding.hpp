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

#include <span>
#include <vector>

#include "mmcm/encoder.hpp"
#include "mmcm/layout.hpp"
#include "mmcm/motion.hpp"

namespace mmcm {

struct WindowSpec {
  int past_tail_frames = 5;  // N'_p
  int future_frames = 20;    // T
  int stride = 0;            // 0 selects T / 4

  int window_frames() const { return past_tail_frames + future_frames; }
  int resolved_stride() const;
  void validate() const;
};

struct MinedWindows {
  Matrix rows;                          // one flattened root-centered window per row
  std::vector<SourcePosition> origins;  // track and first future frame of each row
  std::vector<int> labels;              // track label of each row
};

// Windows of N'_p + T consecutive frames starting at 0, stride, 2 stride, ...
// in every track long enough to hold one. Throws when nothing is mined.
MinedWindows mine_windows(const MotionCorpus& corpus, const WindowSpec& spec);

// flatten(root_center(tail(past, N'_p) ++ future)).
Vector window_vector(std::span<const Pose> past, std::span<const Pose> future,
                     const WindowSpec& spec);

struct Embedder {
  EncoderModel encoder;
  LayoutModel layout;
  WindowSpec spec;

  Vector code(std::span<const Pose> past, std::span<const Pose> future) const;
  Vector embed(std::span<const Pose> past, std::span<const Pose> future) const;
  Vector embed_window(const Vector& window) const;
};

struct EmbedderOptions {
  WindowSpec window;
  EncoderTrainOptions encoder;
  LayoutOptions layout;
};

struct EmbedderFit {
  Embedder embedder;
  MinedWindows windows;
  EncoderTrainReport encoder_report;
};

// Mines Stage-1 windows, trains the encoder on them and lays out their codes.
EmbedderFit fit_embedder(const MotionCorpus& corpus, const EmbedderOptions& options);

Vector embed(const Embedder& embedder, std::span<const Pose> past, std::span<const Pose> future);

}  // namespace mmcm
