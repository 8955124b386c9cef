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
#include <string_view>
#include <vector>

#include "mmcm/motion.hpp"

namespace mmcm {

// Parametric behaviour families. Each is a periodic excursion away from a
// shared neutral standing pose, so single-frame pasts near neutral admit
// futures from several families.
enum class MotionFamily { kWalkCycle, kSitDown, kStandTurn, kArmWave, kCrouch };

std::string_view family_name(MotionFamily family);
// Accepts "walk-cycle", "sit-down", "stand-turn", "arm-wave", "crouch".
MotionFamily parse_family(std::string_view name);

struct SyntheticMotionSpec {
  MotionFamily family = MotionFamily::kWalkCycle;
  double amplitude = 1.0;         // excursion scale, [0.25, 1.5]
  double frequency_hz = 0.0;      // 0 selects the family default; else [0.1, 3]
  double phase = 0.0;             // radians, added to a random per-track phase
  double amplitude_jitter = 0.12;  // relative per-track spread, [0, 0.5]
  double frequency_jitter = 0.03;  // relative per-track spread, [0, 0.2]
  std::uint64_t seed = 0;          // mixed into each track's generator

  void validate() const;
  double resolved_frequency() const;
};

// One spec per family with default parameters.
std::vector<SyntheticMotionSpec> default_family_specs();

struct SyntheticOptions {
  int tracks_per_family = 20;
  int track_length = 120;
  double frame_rate = 25.0;
  int min_track_length = 2;  // callers pass B + T
  double sensor_noise = 0.003;  // meters, per coordinate
};

// Deterministic in (specs, options, seed). Tracks carry the index of their
// spec as label and are root-centered. Uses the H36M skeleton.
MotionCorpus generate_synthetic(std::span<const SyntheticMotionSpec> specs,
                                const SyntheticOptions& options, std::uint64_t seed);

}  // namespace mmcm
