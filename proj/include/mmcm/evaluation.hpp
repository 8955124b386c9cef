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
#include <string>
#include <vector>

#include "mmcm/metrics.hpp"
#include "mmcm/mmgt.hpp"
#include "mmcm/pipeline.hpp"

namespace mmcm {

struct SampleScore {
  std::string id;
  double coverage = 0.0;
  double validity = 0.0;
  double mmcm = 0.0;
  std::vector<int> valid_modes;  // uniq(M), ascending
  std::vector<ModeAssignment> predictions;
  std::vector<ModeAssignment> mmgts;
  int prediction_count = 0;  // I
  int mmgt_count = 0;        // K
  bool degenerate = false;   // no normal MMGT, so C = V = MMCM = 0
  std::optional<double> apd;
  std::optional<DisplacementError> ade_fde;      // needs a ground truth
  std::optional<DisplacementError> mmade_mmfde;  // needs K >= 1
  double seconds = 0.0;
};

// Mode ids of a list of assignments, in order.
std::vector<int> mode_ids(std::span<const ModeAssignment> assignments);

// Fills C, V and MMCM from already computed assignments.
void score_modes(SampleScore& score);

SampleScore score_sample(const FittedPipeline& pipeline, const PredictionSet& predictions,
                         const MmgtSet& mmgt);

struct MetricReport {
  std::vector<SampleScore> samples;
  double mmcm = 0.0;  // mean of per-sample MMCM
  double coverage = 0.0;
  double validity = 0.0;
  double mmcm_of_means = 0.0;  // harmonic mean of the averaged C and V, for reference
  std::optional<double> apd, ade, fde, mmade, mmfde;
  int degenerate_count = 0;
  int prediction_count = 0;
  double total_seconds = 0.0;
  double seconds_per_prediction = 0.0;
};

// Samples are scored concurrently when `parallel` is set; results keep input
// order. Timing fields are filled from per-sample wall clocks.
MetricReport score_dataset(const FittedPipeline& pipeline, std::span<const PredictionSet> predictions,
                           std::span<const MmgtSet> mmgts, bool parallel = true);

// Recomputes the dataset means from `report.samples`.
void aggregate(MetricReport& report);

}  // namespace mmcm
