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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace mmcm {

// Row-major dense matrix; rows are items (windows, codes, layout points).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// keypoint_count x 3 coordinates in meters. Row 0 is the root (hip).
using Pose = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using PoseSequence = std::vector<Pose>;

struct Bone {
  int parent = 0;
  int child = 0;
  friend bool operator==(const Bone&, const Bone&) = default;
};

// Kinematic tree over keypoints, rooted at keypoint 0.
class Skeleton {
 public:
  // Throws InvalidArgument unless `bones` is a tree of keypoint_count - 1
  // edges spanning every keypoint from root 0.
  Skeleton(int keypoint_count, std::vector<Bone> bones,
           std::vector<std::string> names = {}, std::string preset = {});

  // 17-keypoint Human3.6M layout.
  static Skeleton h36m();
  // 21-keypoint SMPL-derived AMASS layout.
  static Skeleton amass();
  // "h36m", "amass" or "synthetic" (an alias of the H36M layout).
  static Skeleton from_preset(std::string_view name);

  int keypoint_count() const { return keypoint_count_; }
  const std::vector<Bone>& bones() const { return bones_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& preset() const { return preset_; }

  // `joint` followed by all of its descendants.
  std::vector<int> subtree(int joint) const;

  friend bool operator==(const Skeleton& a, const Skeleton& b) {
    return a.keypoint_count_ == b.keypoint_count_ && a.bones_ == b.bones_;
  }

 private:
  int keypoint_count_;
  std::vector<Bone> bones_;
  std::vector<std::string> names_;
  std::string preset_;
  std::vector<std::vector<int>> children_;
};

// Where a sequence was cut from: `frame` is the index of the first future
// frame inside `track`.
struct SourcePosition {
  int track = -1;
  int frame = -1;
  friend bool operator==(const SourcePosition&, const SourcePosition&) = default;
};

struct MotionSequence {
  PoseSequence past;
  PoseSequence future;
  double frame_rate = 0.0;
  std::string source_id;
  std::optional<SourcePosition> origin;

  int keypoint_count() const;
  void validate() const;
};

// I candidate futures conditioned on one past. `ground_truth` is the real
// continuation when known (needed by ADE/FDE).
struct PredictionSet {
  PoseSequence past;
  std::vector<PoseSequence> futures;
  std::optional<PoseSequence> ground_truth;
  std::string source_id;
  std::optional<SourcePosition> origin;

  // Throws unless I >= 1 and every future (and the ground truth) has
  // `future_frames` frames of a common keypoint count.
  void validate(int future_frames) const;
};

struct Track {
  std::string source_id;
  int label = -1;  // generating family for synthetic data, -1 if unknown
  PoseSequence frames;
};

struct MotionCorpus {
  Skeleton skeleton = Skeleton::h36m();
  double frame_rate = 50.0;
  std::vector<Track> tracks;

  // Throws unless tracks are non-empty, each has at least `min_frames`
  // frames, and every pose matches the skeleton.
  void validate(int min_frames = 1) const;
  std::size_t frame_count() const;

  // Cuts `past_frames` frames ending at frame - 1 and `future_frames` frames
  // starting at `frame`.
  MotionSequence sequence_at(int track, int frame, int past_frames,
                             int future_frames) const;
};

// Frame-major, then keypoint, then axis.
Vector flatten(std::span<const Pose> frames);
Vector flatten(const Pose& pose);
PoseSequence unflatten(const Vector& flat, int keypoint_count);

// Euclidean norm of the flattened coordinate difference.
double pose_distance(const Pose& a, const Pose& b);
double sequence_distance(std::span<const Pose> a, std::span<const Pose> b);

Pose root_center(const Pose& pose);
PoseSequence root_center(std::span<const Pose> frames);

// One length per bone, in bone-list order.
std::vector<double> bone_lengths(const Pose& pose, const Skeleton& skeleton);

// Last `n` frames of `frames`.
std::span<const Pose> tail(std::span<const Pose> frames, std::size_t n);

}  // namespace mmcm
