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

#include "mmcm/window_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmcm {

VpTree::VpTree(Matrix points) : points_(std::move(points)) {
  std::vector<int> items(points_.rows());
  std::iota(items.begin(), items.end(), 0);
  nodes_.reserve(items.size());
  root_ = build(items, 0, static_cast<int>(items.size()));
}

double VpTree::distance(int row, const Vector& q) const {
  return (points_.row(row).transpose() - q).norm();
}

int VpTree::build(std::vector<int>& items, int begin, int end) {
  if (begin >= end) return -1;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({items[begin], 0.0, -1, -1});
  if (end - begin == 1) return id;

  const Vector vantage = points_.row(items[begin]).transpose();
  std::vector<std::pair<double, int>> rest;
  rest.reserve(end - begin - 1);
  for (int i = begin + 1; i < end; ++i) rest.emplace_back(distance(items[i], vantage), items[i]);
  const std::size_t mid = rest.size() / 2;
  std::nth_element(rest.begin(), rest.begin() + mid, rest.end());
  const double threshold = rest[mid].first;
  // Inside: d <= threshold. Ties go inside so the partition is well-defined.
  auto split = std::partition(rest.begin(), rest.end(),
                              [&](const auto& p) { return p.first <= threshold; });
  const int n_inside = static_cast<int>(split - rest.begin());
  for (std::size_t i = 0; i < rest.size(); ++i) items[begin + 1 + i] = rest[i].second;

  nodes_[id].threshold = threshold;
  const int inside = build(items, begin + 1, begin + 1 + n_inside);
  const int outside = build(items, begin + 1 + n_inside, end);
  nodes_[id].inside = inside;
  nodes_[id].outside = outside;
  return id;
}

std::vector<int> VpTree::radius_search(const Vector& query, double radius) const {
  std::vector<int> out;
  if (root_ < 0) return out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    const double d = distance(n.point, query);
    if (d <= radius) out.push_back(n.point);
    if (n.inside >= 0 && d - radius <= n.threshold) stack.push_back(n.inside);
    if (n.outside >= 0 && d + radius >= n.threshold) stack.push_back(n.outside);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mmcm
