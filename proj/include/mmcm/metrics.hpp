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

#include <optional>
#include <span>
#include <vector>

#include "mmcm/mmgt.hpp"
#include "mmcm/motion.hpp"

namespace mmcm {

inline constexpr int kAbnormal = -2;

struct ModeAssignment {
  int mode = kAbnormal;
  double distance = 0.0;  // to the nearest centroid
  Vector point;           // layout-space embedding
};

// Unique non-abnormal mode ids, ascending.
std::vector<int> valid_modes(std::span<const int> mmgt_modes);

// |uniq(M) ∩ uniq(M̂)| / |uniq(M)|, 0 when M holds no normal mode.
double coverage_rate(std::span<const int> mmgt_modes, std::span<const int> prediction_modes);

// Share of the I predictions whose mode is valid. Throws when I = 0.
double validity_rate(std::span<const int> mmgt_modes, std::span<const int> prediction_modes);

// Harmonic mean of C and V; 0 when both are 0.
double mmcm(double coverage, double validity);

// Mean l2 distance over unordered pairs of flattened futures; empty when I < 2.
std::optional<double> apd(std::span<const PoseSequence> futures);

struct DisplacementError {
  double ade = 0.0;
  double fde = 0.0;
};

// Minimum over predictions of the mean per-frame pose distance (ADE) and of
// the final-frame pose distance (FDE). Poses are root-centered first.
DisplacementError ade_fde(std::span<const PoseSequence> futures, const PoseSequence& target);

// Mean over MMGT members of the per-member ade_fde.
DisplacementError mmade_mmfde(std::span<const PoseSequence> futures, const MmgtSet& mmgt);

}  // namespace mmcm
