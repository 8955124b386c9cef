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
#include <span>
#include <string_view>
#include <vector>

#include "mmcm/layout.hpp"
#include "mmcm/motion.hpp"

namespace mmcm {

inline constexpr int kNoise = -1;

struct ClusterConfig {
  int min_cluster_size = 15;
  int min_samples = 1;

  // h36m/synthetic: (15, 1); amass: (50, 1).
  static ClusterConfig for_preset(std::string_view preset);
  void validate() const;
};

struct MstEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

// One edge of the condensed tree. `child` is a point index when
// child_size == 1 and child < point_count, otherwise a cluster id
// (cluster ids start at point_count; the root is point_count).
struct CondensedEdge {
  int parent = 0;
  int child = 0;
  double lambda = 0.0;
  int child_size = 0;
};

struct Mode {
  int id = 0;
  std::vector<int> members;
  Vector centroid;
  double persistence = 0.0;  // stability of the selected cluster
};

struct ModeTable {
  int point_count = 0;
  std::vector<int> labels;  // mode id or kNoise per point
  std::vector<Mode> modes;
  std::vector<CondensedEdge> condensed;

  int mode_count() const { return static_cast<int>(modes.size()); }
  bool empty() const { return modes.empty(); }
  double noise_rate() const;
  double mean_persistence() const;

  // Arithmetic mean of each mode's member rows.
  void compute_centroids(const Matrix& points);
};

// Distance to the min_samples-th nearest other point.
std::vector<double> core_distances(const Matrix& points, int min_samples);

// Prim's algorithm on d_mreach(a, b) = max(core_a, core_b, |a - b|). Edges are
// returned in insertion order, starting from point 0.
std::vector<MstEdge> mutual_reachability_mst(const Matrix& points, std::span<const double> cores);

// Single-linkage hierarchy from the MST, condensation by min_cluster_size and
// excess-of-mass selection (the root is never selected). Mode ids are ordered
// by each mode's smallest member index. Centroids are left empty.
ModeTable condense_and_extract(std::span<const MstEdge> mst, int point_count,
                               const ClusterConfig& config);

// Full clustering of `points` with centroids filled in.
ModeTable fit_modes(const Matrix& points, const ClusterConfig& config);
ModeTable fit_modes(const LayoutModel& layout, const ClusterConfig& config);

struct StabilityRow {
  ClusterConfig config;
  int layout_dims = 2;
  int mode_count = 0;
  double noise_rate = 0.0;
  double mean_persistence = 0.0;
  double score = 0.0;  // mean_persistence * (1 - noise_rate)
};

// Refits the layout of `codes` per dimension and clusters it per config.
// Rows come back ranked by score, ties toward fewer modes, then grid order.
std::vector<StabilityRow> sweep_stability(const Matrix& codes, std::span<const ClusterConfig> configs,
                                          std::span<const int> layout_dims,
                                          const LayoutOptions& base);

// Rows ranked as sweep_stability does, for layouts already computed.
std::vector<StabilityRow> rank_stability(std::vector<StabilityRow> rows);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// point, mode, x0, x1, ...
void write_mode_csv(const ModeTable& table, const Matrix& points, const std::filesystem::path& path);

}  // namespace mmcm
