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

#include <vector>

#include "mmcm/motion.hpp"

namespace mmcm {

// Vantage-point tree over the rows of a matrix under Euclidean distance.
// Exact: radius_search returns every row within the radius.
class VpTree {
 public:
  VpTree() = default;
  explicit VpTree(Matrix points);

  // Row indices with ||row - query|| <= radius, ascending.
  std::vector<int> radius_search(const Vector& query, double radius) const;

  const Matrix& points() const { return points_; }
  Eigen::Index size() const { return points_.rows(); }

 private:
  struct Node {
    int point = -1;
    double threshold = 0.0;
    int inside = -1;
    int outside = -1;
  };

  int build(std::vector<int>& items, int begin, int end);
  double distance(int row, const Vector& q) const;

  Matrix points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace mmcm
