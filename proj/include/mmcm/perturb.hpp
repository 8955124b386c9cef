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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmcm/evaluation.hpp"
#include "mmcm/mmgt.hpp"
#include "mmcm/pipeline.hpp"

namespace mmcm {

// A test motion drawn from the corpus together with its MMGT set.
struct EvalSample {
  MotionSequence query;
  MmgtSet mmgt;
};

// `count` distinct corpus positions drawn uniformly, in (track, frame) order,
// each with its MMGTs mined under the pipeline's MMGT configuration.
std::vector<EvalSample> make_eval_samples(const MotionCorpus& corpus, const PipelineConfig& config,
                                          int count, std::uint64_t seed);

// Every coordinate gets an independent N(0, sigma^2) offset; poses are then
// re-centered so the root sits where it was.
PoseSequence inject_joint_noise(const PoseSequence& future, double sigma, std::uint64_t seed);

// Multiplies the length of each listed bone by `factor` in every frame by
// translating the child subtree along the bone.
PoseSequence scale_bones(const PoseSequence& future, const Skeleton& skeleton,
                         std::span<const int> bone_indices, double factor);

// `count` distinct bone indices drawn with `seed`, ascending.
std::vector<int> choose_bones(const Skeleton& skeleton, int count, std::uint64_t seed);

// True when some bone of some future frame differs from its length in the
// last past frame by at least `ratio` of that length.
bool length_abnormal(const Pose& last_past, const PoseSequence& future, const Skeleton& skeleton,
                     double ratio = 0.5);

// Distance between the last frame of `past` and the frame preceding the
// future that starts at `future_start`, both root-centered.
double discontinuity(const Pose& last_past, const MotionCorpus& corpus, SourcePosition future_start);

// Bucket i holds [edges[i], edges[i+1]); the last bucket is open-ended.
// Returns -1 below edges[0].
int bucket_of(double value, std::span<const double> edges);

struct MismatchedFuture {
  int sample = 0;  // index into the pasts
  SourcePosition source;
  double discontinuity = 0.0;
  PoseSequence future;
};

struct MismatchBuckets {
  std::vector<double> edges;
  // buckets[b][s]: futures for past s in bucket b
  std::vector<std::vector<std::vector<MismatchedFuture>>> buckets;
  std::vector<int> achieved;  // futures per bucket, summed over pasts
};

MismatchBuckets make_mismatched(const MotionCorpus& corpus, std::span<const MotionSequence> pasts,
                                int future_frames, std::span<const double> edges, int per_bucket,
                                std::uint64_t seed);

struct SweepLevel {
  double level = 0.0;
  double mmcm = 0.0;
  double coverage = 0.0;
  double validity = 0.0;
  std::optional<double> apd;
  std::optional<double> mmade;
  std::optional<double> mmfde;
  int samples = 0;
  int predictions = 0;
  int flagged = 0;  // samples excluded at this level (no prediction left)
};

struct SweepResult {
  std::string name;
  std::string level_name;
  std::vector<SweepLevel> levels;
};

std::vector<double> default_noise_grid();
std::vector<double> default_bone_factors();
std::vector<double> default_mismatch_edges();
std::vector<double> default_removal_grid();
std::vector<int> default_addition_counts();

// Predictions are the MMGT futures, perturbed per level.
SweepResult run_noise_sweep(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                            std::span<const double> sigmas, std::uint64_t seed);
SweepResult run_bone_sweep(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                           std::span<const double> factors, int bones_per_future, std::uint64_t seed);
// Predictions for each past are corpus futures whose discontinuity falls in
// the level's bucket; the level value is the bucket's lower edge.
SweepResult run_mismatch_sweep(const FittedPipeline& pipeline, const MotionCorpus& corpus,
                               std::span<const EvalSample> samples, std::span<const double> edges,
                               int per_bucket, std::uint64_t seed);

// Starting from all MMGT futures as predictions, removes at level v every
// prediction whose mode holds at most v percent of the predictions. Abnormal
// predictions are never removed.
SweepResult run_rare_mode_removal(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                                  std::span<const double> percents);

// Starting from all MMGT futures as predictions, appends `count` copies of
// MMGT futures corrupted with sigma noise. Larger counts extend smaller ones.
SweepResult run_noisy_addition(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                               std::span<const int> counts, double sigma, std::uint64_t seed);

// Scores of the deterministic predictor whose only prediction is the ground
// truth, used as the reference for relative degradation.
SweepLevel score_ground_truth_only(const FittedPipeline& pipeline, std::span<const EvalSample> samples);

// (x_v - x_0) / (x_ref - x_0); 0 when the reference equals x_0.
double relative_degradation(double value, double best, double reference);

// Predictions drawn round-robin from the MMGT futures of the `top_modes`
// most populated valid modes (0 = all valid modes), cycling to I entries.
PredictionSet make_surrogate(const FittedPipeline& pipeline, const EvalSample& sample, int top_modes,
                             int prediction_count);

struct SweepGridPoint {
  int layout_dims = 2;
  ClusterConfig cluster;
};

std::vector<SweepGridPoint> default_sweep_grid();

struct RankingRow {
  SweepGridPoint point;
  int mode_count = 0;
  bool degenerate = false;  // fewer than two modes
  std::vector<double> mmcm;  // dataset MMCM per method
  std::vector<int> order;    // method indices, best first
};

// Reuses `encoder` and refits layout, modes and tau per grid point, then
// scores every method on the same samples.
std::vector<RankingRow> run_hyperparameter_sweep(
    const MotionCorpus& corpus, const PipelineConfig& base, const EncoderModel& encoder,
    std::span<const EvalSample> samples, std::span<const std::vector<PredictionSet>> methods,
    std::span<const SweepGridPoint> grid);

// level,metric,value rows.
std::string sweep_csv(const SweepResult& result);

}  // namespace mmcm
