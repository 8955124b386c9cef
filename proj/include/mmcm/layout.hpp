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
#include <vector>

#include "mmcm/motion.hpp"

namespace mmcm {

struct LayoutOptions {
  int n_neighbors = 15;
  double min_dist = 0.1;
  double spread = 1.0;
  int dims = 2;
  int epochs = 200;
  int negative_sample_rate = 5;
  double learning_rate = 1.0;
  int transform_epochs = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CurveParams {
  double a = 0.0;
  double b = 0.0;
};

// Least-squares fit of 1 / (1 + a x^{2b}) to the offset exponential
// (1 for x < min_dist, exp(-(x - min_dist) / spread) beyond) on 300 points
// of [0, 3 spread].
CurveParams fit_ab_curve(double spread, double min_dist);

// Bandwidth sigma such that sum_j exp(-max(0, d_j - rho) / sigma) = target,
// found by bisection. Returns 1 when every distance is zero.
double smooth_knn_sigma(std::span<const double> dists, double rho, double target);

struct KnnGraph {
  int k = 0;
  std::vector<int> indices;      // n x k, row-major, nearest first
  std::vector<double> distances;  // n x k
};

// Exact k nearest neighbors of every row, excluding the row itself. Ties are
// broken by lower index.
KnnGraph exact_knn(const Matrix& points, int k);

struct GraphEdge {
  int head = 0;
  int tail = 0;
  double weight = 0.0;
};

// Symmetrized fuzzy neighbor graph, both directions listed, sorted by
// (head, tail). Self loops are never present.
std::vector<GraphEdge> fuzzy_graph(const Matrix& codes, int k);

class LayoutModel {
 public:
  Matrix codes;
  Matrix layout;
  LayoutOptions options;
  CurveParams curve;
  // Largest k-th neighbor distance among training codes.
  double support_radius = 0.0;

  bool fitted() const { return layout.rows() > 0 && layout.rows() == codes.rows(); }
  int dims() const { return static_cast<int>(layout.cols()); }

  // Largest per-axis extent of the training layout.
  double scale() const;

  // Out-of-sample placement. A code equal to a training code returns that
  // row; otherwise the point starts at the membership-weighted mean of its k
  // nearest training layouts and is refined by attractive-only epochs
  // against the frozen training layout. Codes farther than support_radius
  // from every training code are then pushed away from the layout mean by
  // (d_min / support_radius - 1) layout scales.
  Vector transform(const Vector& code) const;
  Matrix transform_batch(const Matrix& batch) const;

  // The weighted-mean starting point used by transform, before refinement.
  Vector initial_position(const Vector& code) const;

 private:
  Vector place(const Vector& code, bool refine) const;
};

LayoutModel fit_layout(const Matrix& codes, const LayoutOptions& options);

// Neighborhood preservation of `low` relative to `high`, in [0, 1].
double trustworthiness(const Matrix& high, const Matrix& low, int k);

}  // namespace mmcm
