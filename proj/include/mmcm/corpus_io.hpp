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

#include <filesystem>
#include <vector>

#include "mmcm/binary_io.hpp"
#include "mmcm/motion.hpp"

namespace mmcm {

// Binary container shared by corpora, prediction sets and MMGT collections.
// Layout (all integers little-endian):
//
//   "MMCM"            4-byte magic
//   u8  version       currently 1
//   u8  kind          0 corpus, 1 predictions, 2 mmgt, 3 fitted pipeline
//   u16 reserved      zero
//   u32 keypoint_count
//   str preset        u32 length + bytes; empty for an explicit skeleton
//   u32 bone_count, then bone_count x (u32 parent, u32 child)
//   f64 frame_rate
//   ... kind-specific table (see corpus_io.cpp / mmgt.cpp) ...
//   u64 float_count
//   f32 payload[float_count]   frames in flatten() order
//
// Poses are stored at single precision.
inline constexpr std::uint8_t kContainerVersion = 1;

enum class ContainerKind : std::uint8_t { kCorpus = 0, kPredictions = 1, kMmgt = 2, kPipeline = 3 };

struct ContainerHeader {
  ContainerKind kind = ContainerKind::kCorpus;
  Skeleton skeleton = Skeleton::h36m();
  double frame_rate = 0.0;
};

void write_container_header(ByteWriter& w, const ContainerHeader& header);
// Validates magic, version, kind and skeleton; errors carry byte offsets.
ContainerHeader read_container_header(ByteReader& r, ContainerKind expected);

// Payload helpers: frames are appended/consumed in flatten() order.
void write_payload(ByteWriter& w, const std::vector<const PoseSequence*>& blocks);
// Reads the u64 float count and checks it against `expected_floats` before
// decoding; the returned frames are keypoint_count x 3 poses.
PoseSequence read_payload(ByteReader& r, std::uint64_t expected_floats, int keypoint_count);

// Rounds every coordinate to single precision, the storage precision of the
// container. Applied by generators so in-memory and reloaded data agree.
void quantize_to_storage(PoseSequence& frames);

void save_corpus(const MotionCorpus& corpus, const std::filesystem::path& path);
// Accepts the binary container or the JSON-lines fixture format.
MotionCorpus load_corpus(const std::filesystem::path& path);

// JSON-lines fixture format: a header object on the first line
//   {"format":"mmcm-corpus","version":1,"frame_rate":50,"skeleton":"h36m"}
// (or "skeleton":{"keypoints":K,"bones":[[p,c],...]}), then one object per
// frame: {"track":"walk/0","label":0,"pose":[[x,y,z],...]}. Frames of a track
// are contiguous.
void save_corpus_jsonl(const MotionCorpus& corpus, const std::filesystem::path& path);
MotionCorpus load_corpus_jsonl(const std::filesystem::path& path);

struct PredictionFile {
  Skeleton skeleton = Skeleton::h36m();
  double frame_rate = 0.0;
  int past_frames = 0;
  int future_frames = 0;
  std::vector<PredictionSet> sets;
};

void save_predictions(const PredictionFile& file, const std::filesystem::path& path);
PredictionFile load_predictions(const std::filesystem::path& path);

}  // namespace mmcm
