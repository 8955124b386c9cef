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

#include "mmcm/motion.hpp"

#include <cmath>
#include <string>

#include "mmcm/error.hpp"

namespace mmcm {

Skeleton::Skeleton(int keypoint_count, std::vector<Bone> bones,
                   std::vector<std::string> names, std::string preset)
    : keypoint_count_(keypoint_count),
      bones_(std::move(bones)),
      names_(std::move(names)),
      preset_(std::move(preset)) {
  if (keypoint_count_ <= 0) throw InvalidArgument("skeleton needs at least one keypoint");
  if (static_cast<int>(bones_.size()) != keypoint_count_ - 1) {
    throw InvalidArgument("skeleton with " + std::to_string(keypoint_count_) +
                          " keypoints needs " + std::to_string(keypoint_count_ - 1) +
                          " bones, got " + std::to_string(bones_.size()));
  }
  if (!names_.empty() && static_cast<int>(names_.size()) != keypoint_count_) {
    throw InvalidArgument("keypoint name count does not match keypoint count");
  }
  children_.assign(keypoint_count_, {});
  std::vector<int> parent_count(keypoint_count_, 0);
  for (const Bone& b : bones_) {
    if (b.parent < 0 || b.parent >= keypoint_count_ || b.child < 0 ||
        b.child >= keypoint_count_) {
      throw InvalidArgument("bone index out of range");
    }
    if (b.child == 0) throw InvalidArgument("root keypoint 0 cannot be a bone child");
    if (++parent_count[b.child] > 1) {
      throw InvalidArgument("keypoint " + std::to_string(b.child) + " has two parents");
    }
    children_[b.parent].push_back(b.child);
  }
  // Every keypoint must be reachable from the root.
  if (static_cast<int>(subtree(0).size()) != keypoint_count_) {
    throw InvalidArgument("bones do not form a single tree rooted at keypoint 0");
  }
}

std::vector<int> Skeleton::subtree(int joint) const {
  std::vector<int> out{joint};
  std::vector<char> seen(keypoint_count_, 0);
  seen[joint] = 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int c : children_[out[i]]) {
      if (seen[c]) continue;  // cycle guard while validating
      seen[c] = 1;
      out.push_back(c);
    }
  }
  return out;
}

Skeleton Skeleton::h36m() {
  return Skeleton(17,
                  {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 6}, {0, 7}, {7, 8},
                   {8, 9}, {9, 10}, {8, 11}, {11, 12}, {12, 13}, {8, 14}, {14, 15},
                   {15, 16}},
                  {"hip", "r_hip", "r_knee", "r_ankle", "l_hip", "l_knee", "l_ankle",
                   "spine", "thorax", "neck", "head", "l_shoulder", "l_elbow",
                   "l_wrist", "r_shoulder", "r_elbow", "r_wrist"},
                  "h36m");
}

Skeleton Skeleton::amass() {
  // SMPL body joints with spine3 folded into spine2.
  return Skeleton(21,
                  {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8},
                   {7, 9}, {8, 10}, {6, 11}, {6, 12}, {6, 13}, {11, 14}, {12, 15},
                   {13, 16}, {15, 17}, {16, 18}, {17, 19}, {18, 20}},
                  {"pelvis", "l_hip", "r_hip", "spine1", "l_knee", "r_knee", "spine2",
                   "l_ankle", "r_ankle", "l_foot", "r_foot", "neck", "l_collar",
                   "r_collar", "head", "l_shoulder", "r_shoulder", "l_elbow",
                   "r_elbow", "l_wrist", "r_wrist"},
                  "amass");
}

Skeleton Skeleton::from_preset(std::string_view name) {
  if (name == "h36m") return h36m();
  if (name == "amass") return amass();
  if (name == "synthetic") {
    Skeleton s = h36m();
    s.preset_ = "synthetic";
    return s;
  }
  throw InvalidArgument("unknown skeleton preset '" + std::string(name) + "'");
}

int MotionSequence::keypoint_count() const {
  if (!past.empty()) return static_cast<int>(past.front().rows());
  if (!future.empty()) return static_cast<int>(future.front().rows());
  return 0;
}

void MotionSequence::validate() const {
  if (past.empty() || future.empty()) {
    throw InvalidArgument("motion sequence needs non-empty past and future");
  }
  const auto k = past.front().rows();
  for (const auto* part : {&past, &future}) {
    for (const Pose& p : *part) {
      if (p.rows() != k) throw InvalidArgument("inconsistent keypoint count in sequence");
    }
  }
}

void PredictionSet::validate(int future_frames) const {
  if (past.empty()) throw InvalidArgument("prediction set has an empty past");
  if (futures.empty()) throw InvalidArgument("prediction set needs I >= 1 futures");
  const auto k = past.front().rows();
  auto check = [&](const PoseSequence& seq, const char* what) {
    if (static_cast<int>(seq.size()) != future_frames) {
      throw InvalidArgument(std::string(what) + " has " + std::to_string(seq.size()) +
                            " frames, expected T = " + std::to_string(future_frames));
    }
    for (const Pose& p : seq) {
      if (p.rows() != k) throw InvalidArgument("inconsistent keypoint count in prediction set");
    }
  };
  for (const Pose& p : past) {
    if (p.rows() != k) throw InvalidArgument("inconsistent keypoint count in prediction set");
  }
  for (const auto& f : futures) check(f, "predicted future");
  if (ground_truth) check(*ground_truth, "ground-truth future");
}

void MotionCorpus::validate(int min_frames) const {
  if (tracks.empty()) throw InvalidArgument("corpus has no tracks");
  for (const Track& t : tracks) {
    if (static_cast<int>(t.frames.size()) < min_frames || t.frames.empty()) {
      throw InvalidArgument("track '" + t.source_id + "' has " +
                            std::to_string(t.frames.size()) + " frames, need at least " +
                            std::to_string(std::max(min_frames, 1)));
    }
    for (const Pose& p : t.frames) {
      if (p.rows() != skeleton.keypoint_count()) {
        throw InvalidArgument("track '" + t.source_id + "' does not match the skeleton");
      }
    }
  }
}

std::size_t MotionCorpus::frame_count() const {
  std::size_t n = 0;
  for (const Track& t : tracks) n += t.frames.size();
  return n;
}

MotionSequence MotionCorpus::sequence_at(int track, int frame, int past_frames,
                                         int future_frames) const {
  if (track < 0 || track >= static_cast<int>(tracks.size())) {
    throw InvalidArgument("track index out of range");
  }
  const auto& frames = tracks[track].frames;
  if (frame - past_frames < 0 || frame + future_frames > static_cast<int>(frames.size())) {
    throw InvalidArgument("window does not fit inside track '" + tracks[track].source_id + "'");
  }
  MotionSequence seq;
  seq.past.assign(frames.begin() + (frame - past_frames), frames.begin() + frame);
  seq.future.assign(frames.begin() + frame, frames.begin() + frame + future_frames);
  seq.frame_rate = frame_rate;
  seq.source_id = tracks[track].source_id + "@" + std::to_string(frame);
  seq.origin = SourcePosition{track, frame};
  return seq;
}

Vector flatten(std::span<const Pose> frames) {
  if (frames.empty()) throw InvalidArgument("cannot flatten an empty sequence");
  const auto k = frames.front().rows();
  Vector out(static_cast<Eigen::Index>(frames.size()) * k * 3);
  Eigen::Index off = 0;
  for (const Pose& p : frames) {
    if (p.rows() != k) throw InvalidArgument("inconsistent keypoint count in flatten");
    out.segment(off, k * 3) = Eigen::Map<const Vector>(p.data(), k * 3);
    off += k * 3;
  }
  return out;
}

Vector flatten(const Pose& pose) { return flatten(std::span<const Pose>(&pose, 1)); }

PoseSequence unflatten(const Vector& flat, int keypoint_count) {
  const Eigen::Index per_frame = static_cast<Eigen::Index>(keypoint_count) * 3;
  if (keypoint_count <= 0 || flat.size() == 0 || flat.size() % per_frame != 0) {
    throw InvalidArgument("vector length is not a whole number of frames");
  }
  PoseSequence out;
  for (Eigen::Index off = 0; off < flat.size(); off += per_frame) {
    Pose p(keypoint_count, 3);
    Eigen::Map<Vector>(p.data(), per_frame) = flat.segment(off, per_frame);
    out.push_back(std::move(p));
  }
  return out;
}

double pose_distance(const Pose& a, const Pose& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("pose keypoint counts differ");
  return (a - b).norm();
}

double sequence_distance(std::span<const Pose> a, std::span<const Pose> b) {
  if (a.size() != b.size()) throw InvalidArgument("sequence lengths differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows()) throw InvalidArgument("pose keypoint counts differ");
    sq += (a[i] - b[i]).squaredNorm();
  }
  return std::sqrt(sq);
}

Pose root_center(const Pose& pose) {
  if (!pose.allFinite()) throw InvalidArgument("pose has non-finite coordinates");
  Pose out = pose.rowwise() - pose.row(0);
  out.row(0).setZero();
  return out;
}

PoseSequence root_center(std::span<const Pose> frames) {
  PoseSequence out;
  out.reserve(frames.size());
  for (const Pose& p : frames) out.push_back(root_center(p));
  return out;
}

std::vector<double> bone_lengths(const Pose& pose, const Skeleton& skeleton) {
  if (pose.rows() != skeleton.keypoint_count()) {
    throw InvalidArgument("pose does not match skeleton");
  }
  std::vector<double> out;
  out.reserve(skeleton.bones().size());
  for (const Bone& b : skeleton.bones()) {
    out.push_back((pose.row(b.child) - pose.row(b.parent)).norm());
  }
  return out;
}

std::span<const Pose> tail(std::span<const Pose> frames, std::size_t n) {
  if (n > frames.size()) {
    throw InvalidArgument("requested " + std::to_string(n) + " trailing frames of " +
                          std::to_string(frames.size()));
  }
  return frames.subspan(frames.size() - n);
}

}  // namespace mmcm
