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
#include <utility>
#include <vector>

#include "mmcm/mmgt.hpp"
#include "mmcm/motion.hpp"
#include "mmcm/perturb.hpp"
#include "mmcm/pipeline.hpp"

namespace mmcm::testing {

// The default 5-family synthetic corpus, generated as `mmcm gen` does with
// seed 0.
const MotionCorpus& synthetic_corpus();

// Default synthetic pipeline fitted on synthetic_corpus(); fitted once per
// process.
const FittedPipeline& synthetic_pipeline();

// Test motions drawn as `mmcm perturb` does.
const std::vector<EvalSample>& synthetic_samples();

// Small corpus of random-walk tracks for format and MMGT checks.
MotionCorpus random_corpus(int tracks, int frames, const Skeleton& skeleton, std::uint64_t seed);

// Spearman rank correlation, average ranks on ties.
double spearman(std::span<const double> x, std::span<const double> y);

struct PlantedBlobs {
  Matrix points;
  std::vector<int> labels;
};

// Uniform-in-ball blobs with centers on a scaled simplex-like lattice so that
// every pair of centers is at least `separation` apart.
PlantedBlobs planted_blobs(std::span<const int> sizes, int dims, double radius, double separation,
                           std::uint64_t seed);

// Kruskal on the complete mutual reachability graph.
double kruskal_mst_weight(const Matrix& points, std::span<const double> cores);

// Brute-force core distances (sort every row).
std::vector<double> naive_core_distances(const Matrix& points, int min_samples);

// Reference density clustering: agglomerative single linkage over the full
// mutual reachability matrix, condensation and excess-of-mass selection, all
// on explicit point sets. Returns a label per point, -1 for noise.
std::vector<int> naive_density_clustering(const Matrix& points, int min_cluster_size, int min_samples);

// True when two labelings induce the same partition with noise mapped to
// noise.
bool same_partition(std::span<const int> a, std::span<const int> b);

// Every (track, frame) whose preceding window matches the query, by a plain
// double loop over tracks and positions.
std::vector<SourcePosition> exhaustive_mmgt_positions(const MotionSequence& query, const MotionCorpus& corpus,
                                                      const MmgtConfig& config, int future_frames);

}  // namespace mmcm::testing
