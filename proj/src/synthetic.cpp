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

#include "mmcm/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "mmcm/corpus_io.hpp"
#include "mmcm/error.hpp"
#include "mmcm/rng.hpp"

namespace mmcm {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

constexpr int kJoints = 17;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// H36M keypoint indices.
enum Joint {
  kHip = 0, kRHip, kRKnee, kRAnkle, kLHip, kLKnee, kLAnkle, kSpine, kThorax,
  kNeck, kHead, kLShoulder, kLElbow, kLWrist, kRShoulder, kRElbow, kRWrist
};

// Rest offsets from parent, meters. +x left, +y up, +z forward.
const std::array<Vector3d, kJoints>& rest_offsets() {
  static const std::array<Vector3d, kJoints> offsets = {
      Vector3d(0, 0, 0),       Vector3d(-0.12, 0, 0),    Vector3d(0, -0.44, 0),
      Vector3d(0, -0.44, 0),   Vector3d(0.12, 0, 0),     Vector3d(0, -0.44, 0),
      Vector3d(0, -0.44, 0),   Vector3d(0, 0.24, 0),     Vector3d(0, 0.26, 0),
      Vector3d(0, 0.10, 0.02), Vector3d(0, 0.12, 0),     Vector3d(0.16, 0, 0),
      Vector3d(0, -0.28, 0),   Vector3d(0, -0.25, 0),    Vector3d(-0.16, 0, 0),
      Vector3d(0, -0.28, 0),   Vector3d(0, -0.25, 0)};
  return offsets;
}

Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitX()).toRotationMatrix(); }
Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitY()).toRotationMatrix(); }
Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitZ()).toRotationMatrix(); }

// Local joint rotations; each rotates the bones leaving that joint.
using LocalRotations = std::array<Matrix3d, kJoints>;

LocalRotations neutral_rotations() {
  LocalRotations r;
  r.fill(Matrix3d::Identity());
  r[kLElbow] = rot_x(-0.15);
  r[kRElbow] = rot_x(-0.15);
  return r;
}

Pose forward_kinematics(const Skeleton& skeleton, const LocalRotations& local, double scale) {
  std::array<Matrix3d, kJoints> world;
  Pose pose = Pose::Zero(kJoints, 3);
  world[kHip] = local[kHip];
  for (const Bone& b : skeleton.bones()) {
    const Vector3d pos = pose.row(b.parent).transpose() +
                         world[b.parent] * (scale * rest_offsets()[b.child]);
    pose.row(b.child) = pos.transpose();
    world[b.child] = world[b.parent] * local[b.child];
  }
  return pose;
}

struct TrackParams {
  double amplitude;
  double frequency;
  double phase;
  double body_scale;
};

// Fills `r` for time t. `e` is the 0..1 excursion, `s` the signed oscillation.
void pose_family(MotionFamily family, const TrackParams& p, double t, LocalRotations& r) {
  const double w = kTwoPi * p.frequency * t + p.phase;
  const double s = std::sin(w);
  const double e = 0.5 * (1.0 - std::cos(w));
  const double a = p.amplitude;
  switch (family) {
    case MotionFamily::kWalkCycle: {
      const double swing = 0.45 * a * s;
      r[kLHip] = rot_x(-swing);
      r[kRHip] = rot_x(swing);
      r[kLKnee] = rot_x(0.9 * 0.45 * a * std::max(0.0, s));
      r[kRKnee] = rot_x(0.9 * 0.45 * a * std::max(0.0, -s));
      r[kLShoulder] = rot_x(0.6 * swing);
      r[kRShoulder] = rot_x(-0.6 * swing);
      r[kSpine] = rot_y(0.15 * swing);
      break;
    }
    case MotionFamily::kSitDown: {
      const double d = a * e;
      r[kLHip] = rot_x(-1.45 * d);
      r[kRHip] = rot_x(-1.45 * d);
      r[kLKnee] = rot_x(1.55 * d);
      r[kRKnee] = rot_x(1.55 * d);
      r[kSpine] = rot_x(0.35 * d);
      r[kLShoulder] = rot_x(-0.35 * d);
      r[kRShoulder] = rot_x(-0.35 * d);
      r[kLElbow] = rot_x(-0.15 - 0.5 * d);
      r[kRElbow] = rot_x(-0.15 - 0.5 * d);
      break;
    }
    case MotionFamily::kStandTurn: {
      r[kHip] = rot_y(0.9 * a * s);
      r[kNeck] = rot_y(0.3 * a * s);
      r[kLShoulder] = rot_z(0.15 * a * std::abs(s));
      r[kRShoulder] = rot_z(-0.15 * a * std::abs(s));
      break;
    }
    case MotionFamily::kArmWave: {
      const double d = a * e;
      const double wave = 0.3 + 0.5 * std::sin(2.5 * w);
      r[kRShoulder] = rot_z(-2.5 * d);
      r[kRElbow] = rot_x(-0.15 - wave * d);
      r[kNeck] = rot_z(-0.15 * d);
      break;
    }
    case MotionFamily::kCrouch: {
      const double d = a * e;
      r[kLHip] = rot_x(-1.9 * d) * rot_z(0.35 * d);
      r[kRHip] = rot_x(-1.9 * d) * rot_z(-0.35 * d);
      r[kLKnee] = rot_x(2.2 * d);
      r[kRKnee] = rot_x(2.2 * d);
      r[kSpine] = rot_x(0.15 * d);
      r[kLShoulder] = rot_x(-1.4 * d);
      r[kRShoulder] = rot_x(-1.4 * d);
      r[kLElbow] = rot_x(-0.15 + 0.1 * d);
      r[kRElbow] = rot_x(-0.15 + 0.1 * d);
      break;
    }
  }
}

double default_frequency(MotionFamily family) {
  switch (family) {
    case MotionFamily::kWalkCycle: return 1.0;
    case MotionFamily::kSitDown: return 0.3;
    case MotionFamily::kStandTurn: return 0.4;
    case MotionFamily::kArmWave: return 0.4;
    case MotionFamily::kCrouch: return 0.35;
  }
  return 1.0;
}

}  // namespace

std::string_view family_name(MotionFamily family) {
  switch (family) {
    case MotionFamily::kWalkCycle: return "walk-cycle";
    case MotionFamily::kSitDown: return "sit-down";
    case MotionFamily::kStandTurn: return "stand-turn";
    case MotionFamily::kArmWave: return "arm-wave";
    case MotionFamily::kCrouch: return "crouch";
  }
  return "unknown";
}

MotionFamily parse_family(std::string_view name) {
  for (auto f : {MotionFamily::kWalkCycle, MotionFamily::kSitDown, MotionFamily::kStandTurn,
                 MotionFamily::kArmWave, MotionFamily::kCrouch}) {
    if (family_name(f) == name) return f;
  }
  throw InvalidArgument("invalid motion family '" + std::string(name) + "'");
}

void SyntheticMotionSpec::validate() const {
  if (!(amplitude >= 0.25 && amplitude <= 1.5)) {
    throw InvalidArgument("amplitude must lie in [0.25, 1.5]");
  }
  if (frequency_hz != 0.0 && !(frequency_hz >= 0.1 && frequency_hz <= 3.0)) {
    throw InvalidArgument("frequency_hz must be 0 (family default) or lie in [0.1, 3]");
  }
  if (!std::isfinite(phase)) throw InvalidArgument("phase must be finite");
  if (!(amplitude_jitter >= 0.0 && amplitude_jitter <= 0.5)) {
    throw InvalidArgument("amplitude_jitter must lie in [0, 0.5]");
  }
  if (!(frequency_jitter >= 0.0 && frequency_jitter <= 0.2)) {
    throw InvalidArgument("frequency_jitter must lie in [0, 0.2]");
  }
}

double SyntheticMotionSpec::resolved_frequency() const {
  return frequency_hz > 0.0 ? frequency_hz : default_frequency(family);
}

std::vector<SyntheticMotionSpec> default_family_specs() {
  std::vector<SyntheticMotionSpec> specs;
  for (auto f : {MotionFamily::kWalkCycle, MotionFamily::kSitDown, MotionFamily::kStandTurn,
                 MotionFamily::kArmWave, MotionFamily::kCrouch}) {
    SyntheticMotionSpec s;
    s.family = f;
    specs.push_back(s);
  }
  return specs;
}

MotionCorpus generate_synthetic(std::span<const SyntheticMotionSpec> specs,
                                const SyntheticOptions& options, std::uint64_t seed) {
  if (specs.empty()) throw InvalidArgument("no synthetic motion specs given");
  if (options.tracks_per_family <= 0) throw InvalidArgument("tracks_per_family must be positive");
  if (options.track_length < std::max(options.min_track_length, 2)) {
    throw InvalidArgument("track_length " + std::to_string(options.track_length) +
                          " is shorter than the required " +
                          std::to_string(std::max(options.min_track_length, 2)));
  }
  if (!(options.frame_rate > 0.0)) throw InvalidArgument("frame_rate must be positive");
  for (const auto& s : specs) s.validate();

  MotionCorpus corpus{Skeleton::from_preset("synthetic"), options.frame_rate, {}};
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const SyntheticMotionSpec& spec = specs[si];
    for (int ti = 0; ti < options.tracks_per_family; ++ti) {
      Rng rng(derive_seed(derive_seed(seed ^ spec.seed, si), static_cast<std::uint64_t>(ti)));
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      std::uniform_real_distribution<double> angle(0.0, kTwoPi);
      std::normal_distribution<double> noise(0.0, options.sensor_noise);
      TrackParams p;
      p.amplitude = spec.amplitude * (1.0 + spec.amplitude_jitter * unit(rng));
      p.frequency = spec.resolved_frequency() * (1.0 + spec.frequency_jitter * unit(rng));
      p.phase = spec.phase + angle(rng);
      p.body_scale = 1.0 + 0.03 * unit(rng);

      Track track;
      track.source_id = std::string(family_name(spec.family)) + "/" + std::to_string(ti);
      track.label = static_cast<int>(si);
      track.frames.reserve(options.track_length);
      for (int f = 0; f < options.track_length; ++f) {
        LocalRotations local = neutral_rotations();
        pose_family(spec.family, p, f / options.frame_rate, local);
        Pose pose = forward_kinematics(corpus.skeleton, local, p.body_scale);
        for (Eigen::Index j = 1; j < pose.rows(); ++j) {
          for (int a = 0; a < 3; ++a) pose(j, a) += noise(rng);
        }
        track.frames.push_back(std::move(pose));
      }
      quantize_to_storage(track.frames);
      corpus.tracks.push_back(std::move(track));
    }
  }
  return corpus;
}

}  // namespace mmcm
