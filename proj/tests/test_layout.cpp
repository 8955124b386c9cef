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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mmcm/error.hpp"
#include "mmcm/layout.hpp"
#include "support.hpp"

using namespace mmcm;

namespace {

Matrix random_points(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return x;
}

}  // namespace

TEST_CASE("curve parameters agree with known reference values") {
  // Values printed by umap-learn's find_ab_params for these settings.
  const CurveParams c = fit_ab_curve(1.0, 0.1);
  CHECK(c.a == doctest::Approx(1.577).epsilon(0.02));
  CHECK(c.b == doctest::Approx(0.895).epsilon(0.02));
  const CurveParams d = fit_ab_curve(1.0, 0.5);
  CHECK(d.a == doctest::Approx(0.583).epsilon(0.03));
  CHECK(d.b == doctest::Approx(1.334).epsilon(0.03));
}

TEST_CASE("bandwidth bisection solves the membership equation") {
  const std::vector<double> d{0.5, 0.7, 0.9, 1.4, 2.0, 2.2};
  const double rho = 0.5, target = std::log2(6.0);
  const double sigma = smooth_knn_sigma(d, rho, target);
  double sum = 0.0;
  for (double x : d) sum += std::exp(-std::max(0.0, x - rho) / sigma);
  CHECK(sum == doctest::Approx(target).epsilon(1e-4));
  const std::vector<double> zeros(4, 0.0);
  CHECK(smooth_knn_sigma(zeros, 0.0, 2.0) == 1.0);
}

TEST_CASE("exact knn matches a sort of all distances") {
  const Matrix x = random_points(80, 3, 1);
  const KnnGraph g = exact_knn(x, 6);
  for (int i = 0; i < 80; ++i) {
    std::vector<std::pair<double, int>> all;
    for (int j = 0; j < 80; ++j) {
      if (j != i) all.emplace_back((x.row(i) - x.row(j)).norm(), j);
    }
    std::sort(all.begin(), all.end());
    for (int k = 0; k < 6; ++k) {
      CHECK(g.indices[i * 6 + k] == all[k].second);
      CHECK(g.distances[i * 6 + k] == doctest::Approx(all[k].first));
    }
  }
}

TEST_CASE("the fuzzy graph is symmetric with weights in (0, 1]") {
  const Matrix x = random_points(60, 4, 2);
  const auto edges = fuzzy_graph(x, 8);
  REQUIRE_FALSE(edges.empty());
  for (const auto& e : edges) {
    CHECK(e.head != e.tail);
    CHECK(e.weight > 0.0);
    CHECK(e.weight <= 1.0);
    const auto it = std::find_if(edges.begin(), edges.end(),
                                 [&](const GraphEdge& f) { return f.head == e.tail && f.tail == e.head; });
    REQUIRE(it != edges.end());
    CHECK(it->weight == e.weight);
  }
  CHECK(std::is_sorted(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.head != b.head ? a.head < b.head : a.tail < b.tail;
  }));
}

TEST_CASE("trustworthiness is one for an isometry and lower for a shuffle") {
  const Matrix x = random_points(120, 5, 3);
  Matrix rotated = x.leftCols(5);
  CHECK(trustworthiness(x, rotated * 2.0, 10) == doctest::Approx(1.0));
  Matrix shuffled = x;
  std::mt19937_64 rng(4);
  for (Eigen::Index i = shuffled.rows() - 1; i > 0; --i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    shuffled.row(i).swap(shuffled.row(pick(rng)));
  }
  CHECK(trustworthiness(x, shuffled, 10) < 0.7);
}

TEST_CASE("layouts of planted blobs keep blobs apart and are deterministic") {
  const std::vector<int> sizes{50, 50, 50};
  const auto blobs = testing::planted_blobs(sizes, 10, 1.0, 8.0, 5);
  LayoutOptions o;
  o.seed = 9;
  o.epochs = 150;
  const LayoutModel a = fit_layout(blobs.points, o);
  const LayoutModel b = fit_layout(blobs.points, o);
  CHECK(a.layout == b.layout);
  CHECK(a.fitted());
  CHECK(a.dims() == 2);
  CHECK(trustworthiness(blobs.points, a.layout, 15) >= 0.9);
  // Nearest layout neighbour of every point belongs to the same blob.
  int same = 0;
  for (Eigen::Index i = 0; i < a.layout.rows(); ++i) {
    double best = 1e300;
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < a.layout.rows(); ++j) {
      const double d = (a.layout.row(i) - a.layout.row(j)).squaredNorm();
      if (j != i && d < best) {
        best = d;
        arg = j;
      }
    }
    same += blobs.labels[i] == blobs.labels[arg] ? 1 : 0;
  }
  CHECK(same == a.layout.rows());
}

TEST_CASE("transform returns stored rows, stays near neighbours and pushes far codes out") {
  const std::vector<int> sizes{40, 40};
  const auto blobs = testing::planted_blobs(sizes, 6, 1.0, 8.0, 6);
  LayoutOptions o;
  o.seed = 2;
  const LayoutModel m = fit_layout(blobs.points, o);
  for (Eigen::Index i = 0; i < 80; i += 9) CHECK(m.transform(blobs.points.row(i).transpose()) == m.layout.row(i).transpose());

  Vector near = blobs.points.row(3).transpose();
  near[0] += 1e-4;
  CHECK((m.transform(near) - m.layout.row(3).transpose()).norm() < 0.1 * m.scale());

  const Vector center = m.layout.colwise().mean().transpose();
  double max_r = 0.0;
  for (Eigen::Index i = 0; i < m.layout.rows(); ++i) max_r = std::max(max_r, (m.layout.row(i).transpose() - center).norm());
  const Vector far = blobs.points.row(0).transpose() + Vector::Constant(6, 40.0);
  CHECK((m.transform(far) - center).norm() > max_r);

  const Matrix batch = m.transform_batch(blobs.points.topRows(5));
  CHECK(batch == m.layout.topRows(5));
}

TEST_CASE("invalid layout options are rejected") {
  LayoutOptions o;
  o.n_neighbors = 1;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = LayoutOptions{};
  o.dims = 0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = LayoutOptions{};
  o.min_dist = 2.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  CHECK_THROWS_AS(fit_layout(random_points(5, 3, 1), LayoutOptions{}), InvalidArgument);
}
