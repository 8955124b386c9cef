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

#include "mmcm/embedding.hpp"

#include <string>

#include "mmcm/error.hpp"

namespace mmcm {

int WindowSpec::resolved_stride() const {
  if (stride > 0) return stride;
  return std::max(1, future_frames / 4);
}

void WindowSpec::validate() const {
  if (past_tail_frames < 1) throw InvalidArgument("past tail N'_p must be at least 1 frame");
  if (future_frames < 1) throw InvalidArgument("future length T must be at least 1 frame");
  if (stride < 0) throw InvalidArgument("window stride must be non-negative");
}

MinedWindows mine_windows(const MotionCorpus& corpus, const WindowSpec& spec) {
  spec.validate();
  const int w = spec.window_frames();
  const int stride = spec.resolved_stride();
  const int k = corpus.skeleton.keypoint_count();
  std::vector<std::pair<int, int>> starts;
  for (int ti = 0; ti < static_cast<int>(corpus.tracks.size()); ++ti) {
    const int n = static_cast<int>(corpus.tracks[ti].frames.size());
    for (int s = 0; s + w <= n; s += stride) starts.emplace_back(ti, s);
  }
  if (starts.empty()) {
    throw InvalidArgument("no track holds a window of " + std::to_string(w) + " frames");
  }
  MinedWindows out;
  out.rows.resize(static_cast<Eigen::Index>(starts.size()), static_cast<Eigen::Index>(w) * k * 3);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto [ti, s] = starts[i];
    const auto& frames = corpus.tracks[ti].frames;
    const PoseSequence centered = root_center(std::span<const Pose>(frames.data() + s, w));
    out.rows.row(static_cast<Eigen::Index>(i)) = flatten(centered).transpose();
    out.origins.push_back({ti, s + spec.past_tail_frames});
    out.labels.push_back(corpus.tracks[ti].label);
  }
  return out;
}

Vector window_vector(std::span<const Pose> past, std::span<const Pose> future,
                     const WindowSpec& spec) {
  if (static_cast<int>(past.size()) < spec.past_tail_frames) {
    throw InvalidArgument("past has " + std::to_string(past.size()) + " frames, N'_p = " +
                          std::to_string(spec.past_tail_frames));
  }
  if (static_cast<int>(future.size()) != spec.future_frames) {
    throw InvalidArgument("future has " + std::to_string(future.size()) + " frames, T = " +
                          std::to_string(spec.future_frames));
  }
  PoseSequence frames(tail(past, spec.past_tail_frames).begin(),
                      tail(past, spec.past_tail_frames).end());
  frames.insert(frames.end(), future.begin(), future.end());
  return flatten(root_center(frames));
}

Vector Embedder::code(std::span<const Pose> past, std::span<const Pose> future) const {
  return encoder.encode(window_vector(past, future, spec));
}

Vector Embedder::embed_window(const Vector& window) const {
  return layout.transform(encoder.encode(window));
}

Vector Embedder::embed(std::span<const Pose> past, std::span<const Pose> future) const {
  return layout.transform(code(past, future));
}

Vector embed(const Embedder& embedder, std::span<const Pose> past, std::span<const Pose> future) {
  return embedder.embed(past, future);
}

EmbedderFit fit_embedder(const MotionCorpus& corpus, const EmbedderOptions& options) {
  EmbedderFit fit;
  fit.windows = mine_windows(corpus, options.window);
  fit.embedder.spec = options.window;
  fit.embedder.encoder = train_encoder(fit.windows.rows, options.encoder, &fit.encoder_report);
  const Matrix codes = fit.embedder.encoder.encode_batch(fit.windows.rows);
  fit.embedder.layout = fit_layout(codes, options.layout);
  return fit;
}

}  // namespace mmcm
