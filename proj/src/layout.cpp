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

#include "mmcm/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "mmcm/error.hpp"
#include "mmcm/rng.hpp"

namespace mmcm {
namespace {

constexpr double kClip = 4.0;

double clip(double v) { return std::clamp(v, -kClip, kClip); }

double smallest_positive(std::span<const double> d) {
  double rho = 0.0;
  for (double x : d) {
    if (x > 0.0) {
      rho = x;
      break;
    }
  }
  return rho;
}

// Weights of one row of the neighbor graph.
std::vector<double> membership(std::span<const double> d, int k) {
  std::vector<double> w(d.size(), 1.0);
  const bool all_zero = std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
  if (all_zero) return w;
  const double rho = smallest_positive(d);
  double sigma = smooth_knn_sigma(d, rho, std::log2(static_cast<double>(k)));
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  sigma = std::max(sigma, 1e-3 * mean);
  for (std::size_t j = 0; j < d.size(); ++j) w[j] = std::exp(-std::max(0.0, d[j] - rho) / sigma);
  return w;
}

Matrix pca_init(const Matrix& codes, int dims, Rng& rng) {
  const Eigen::Index n = codes.rows();
  const Matrix centered = codes.rowwise() - codes.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / std::max<double>(1.0, n - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index p = cov.rows();
  Matrix out = Matrix::Zero(n, dims);
  for (int c = 0; c < dims && c < p; ++c) {
    Vector v = eig.eigenvectors().col(p - 1 - c);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    out.col(c) = centered * v;
  }
  const double m = out.cwiseAbs().maxCoeff();
  if (m > 0) out *= 10.0 / m;
  std::normal_distribution<double> noise(0.0, 1e-4);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += noise(rng);
  return out;
}

void optimize(Matrix& emb, const std::vector<GraphEdge>& edges, const LayoutOptions& o,
              const CurveParams& c, Rng& rng) {
  const int dims = static_cast<int>(emb.cols());
  const auto n = static_cast<std::uint64_t>(emb.rows());
  double max_w = 0.0;
  for (const auto& e : edges) max_w = std::max(max_w, e.weight);
  std::vector<int> head, tail;
  std::vector<double> eps, next, eps_neg, next_neg;
  for (const auto& e : edges) {
    if (e.weight < max_w / o.epochs) continue;
    head.push_back(e.head);
    tail.push_back(e.tail);
    const double s = max_w / e.weight;
    eps.push_back(s);
    next.push_back(s);
    eps_neg.push_back(s / o.negative_sample_rate);
    next_neg.push_back(s / o.negative_sample_rate);
  }
  const double a = c.a, b = c.b;
  for (int epoch = 0; epoch < o.epochs; ++epoch) {
    const double alpha = o.learning_rate * (1.0 - static_cast<double>(epoch) / o.epochs);
    for (std::size_t i = 0; i < head.size(); ++i) {
      if (next[i] > epoch) continue;
      auto current = emb.row(head[i]);
      auto other = emb.row(tail[i]);
      double d2 = (current - other).squaredNorm();
      double coeff = 0.0;
      if (d2 > 0.0) coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
      for (int d = 0; d < dims; ++d) {
        const double g = clip(coeff * (current(d) - other(d)));
        current(d) += g * alpha;
        other(d) -= g * alpha;
      }
      next[i] += eps[i];

      const int n_neg = static_cast<int>((epoch - next_neg[i]) / eps_neg[i]);
      for (int p = 0; p < n_neg; ++p) {
        const auto k = static_cast<Eigen::Index>(rng() % n);
        if (k == head[i]) continue;
        auto neg = emb.row(k);
        d2 = (current - neg).squaredNorm();
        coeff = d2 > 0.0 ? 2.0 * b / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0)) : 0.0;
        for (int d = 0; d < dims; ++d) {
          const double g = coeff > 0.0 ? clip(coeff * (current(d) - neg(d))) : kClip;
          current(d) += g * alpha;
        }
      }
      next_neg[i] += n_neg * eps_neg[i];
    }
  }
}

}  // namespace

void LayoutOptions::validate() const {
  if (n_neighbors < 2) throw InvalidArgument("layout needs at least 2 neighbors");
  if (!(min_dist >= 0.0) || !(spread > 0.0) || min_dist > spread) {
    throw InvalidArgument("layout requires 0 <= min_dist <= spread");
  }
  if (dims < 1) throw InvalidArgument("layout dimension must be at least 1");
  if (epochs < 1) throw InvalidArgument("layout epochs must be positive");
  if (negative_sample_rate < 0) throw InvalidArgument("negative sample rate must be non-negative");
  if (!(learning_rate > 0.0)) throw InvalidArgument("layout learning rate must be positive");
  if (transform_epochs < 0) throw InvalidArgument("transform epochs must be non-negative");
}

CurveParams fit_ab_curve(double spread, double min_dist) {
  if (!(spread > 0.0) || !(min_dist >= 0.0)) throw InvalidArgument("invalid spread/min_dist");
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints), ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * i / (kPoints - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto cost = [&](double a, double b) {
    double s = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      s += r * r;
    }
    return s;
  };
  double a = 1.0, b = 1.0, lambda = 1e-3;
  double current = cost(a, b);
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (int i = 0; i < kPoints; ++i) {
      const double x = xs[i];
      const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
      const double g = 1.0 / (1.0 + a * p);
      const double r = g - ys[i];
      Eigen::Vector2d j(-p * g * g, x > 0.0 ? -a * p * 2.0 * std::log(x) * g * g : 0.0);
      jtj += j * j.transpose();
      jtr += j * r;
    }
    Eigen::Matrix2d m = jtj;
    m.diagonal() *= 1.0 + lambda;
    const Eigen::Vector2d step = m.ldlt().solve(-jtr);
    const double na = a + step(0), nb = b + step(1);
    if (na > 0.0 && nb > 0.0) {
      const double next = cost(na, nb);
      if (next < current) {
        const bool converged = current - next < 1e-15 * (1.0 + current);
        a = na;
        b = nb;
        current = next;
        lambda = std::max(lambda / 10.0, 1e-12);
        if (converged) break;
        continue;
      }
    }
    lambda *= 10.0;
    if (lambda > 1e12) break;
  }
  return {a, b};
}

double smooth_knn_sigma(std::span<const double> dists, double rho, double target) {
  if (dists.empty()) throw InvalidArgument("no neighbor distances");
  if (std::all_of(dists.begin(), dists.end(), [](double x) { return x == 0.0; })) return 1.0;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    double psum = 0.0;
    for (double d : dists) psum += std::exp(-std::max(0.0, d - rho) / mid);
    if (std::abs(psum - target) < 1e-13 * target) break;
    if (psum > target) {
      hi = mid;
      mid = 0.5 * (lo + hi);
    } else {
      lo = mid;
      mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
    }
  }
  return mid;
}

KnnGraph exact_knn(const Matrix& points, int k) {
  const auto n = static_cast<int>(points.rows());
  if (k < 1 || k >= n) {
    throw InvalidArgument("k-NN needs 1 <= k < N (k = " + std::to_string(k) +
                          ", N = " + std::to_string(n) + ")");
  }
  KnnGraph g;
  g.k = k;
  g.indices.resize(static_cast<std::size_t>(n) * k);
  g.distances.resize(static_cast<std::size_t>(n) * k);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const Vector dist = (points.rowwise() - points.row(i)).rowwise().norm();
    std::vector<int> order;
    order.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int x, int y) {
      return dist(x) < dist(y) || (dist(x) == dist(y) && x < y);
    });
    for (int j = 0; j < k; ++j) {
      g.indices[static_cast<std::size_t>(i) * k + j] = order[j];
      g.distances[static_cast<std::size_t>(i) * k + j] = dist(order[j]);
    }
  }
  return g;
}

std::vector<GraphEdge> fuzzy_graph(const Matrix& codes, int k) {
  const KnnGraph g = exact_knn(codes, k);
  const auto n = static_cast<std::size_t>(codes.rows());
  // (min, max) -> (weight from min's row, weight from max's row)
  std::map<std::pair<int, int>, std::pair<double, double>> halves;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> d(g.distances.data() + i * k, k);
    const std::vector<double> w = membership(d, k);
    for (int j = 0; j < k; ++j) {
      const int other = g.indices[i * k + j];
      const int self = static_cast<int>(i);
      auto& slot = halves[{std::min(self, other), std::max(self, other)}];
      (self < other ? slot.first : slot.second) = w[j];
    }
  }
  std::vector<GraphEdge> edges;
  edges.reserve(halves.size() * 2);
  for (const auto& [key, w] : halves) {
    const double sym = w.first + w.second - w.first * w.second;
    if (sym <= 0.0) continue;
    edges.push_back({key.first, key.second, sym});
    edges.push_back({key.second, key.first, sym});
  }
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
    return x.head != y.head ? x.head < y.head : x.tail < y.tail;
  });
  return edges;
}

LayoutModel fit_layout(const Matrix& codes, const LayoutOptions& options) {
  options.validate();
  if (codes.rows() < options.n_neighbors + 1) {
    throw InvalidArgument("layout needs N >= k + 1 rows (N = " + std::to_string(codes.rows()) +
                          ", k = " + std::to_string(options.n_neighbors) + ")");
  }
  if (!codes.allFinite()) throw InvalidArgument("codes contain non-finite values");
  LayoutModel m;
  m.codes = codes;
  m.options = options;
  m.curve = fit_ab_curve(options.spread, options.min_dist);
  Rng rng(derive_seed(options.seed, "layout"));
  const std::vector<GraphEdge> edges = fuzzy_graph(codes, options.n_neighbors);
  {
    const KnnGraph g = exact_knn(codes, options.n_neighbors);
    for (int i = 0; i < static_cast<int>(codes.rows()); ++i) {
      m.support_radius = std::max(
          m.support_radius, g.distances[static_cast<std::size_t>(i) * g.k + g.k - 1]);
    }
  }
  m.layout = pca_init(codes, options.dims, rng);
  optimize(m.layout, edges, options, m.curve, rng);
  return m;
}

double LayoutModel::scale() const {
  if (!fitted()) return 0.0;
  return (layout.colwise().maxCoeff() - layout.colwise().minCoeff()).maxCoeff();
}

Vector LayoutModel::initial_position(const Vector& code) const {
  return place(code, false);
}

Vector LayoutModel::transform(const Vector& code) const { return place(code, true); }

Vector LayoutModel::place(const Vector& code, bool refine) const {
  if (!fitted()) throw InvalidArgument("layout is not fitted");
  if (code.size() != codes.cols()) {
    throw InvalidArgument("code width " + std::to_string(code.size()) +
                          " does not match layout training width " + std::to_string(codes.cols()));
  }
  if (!code.allFinite()) throw InvalidArgument("code contains non-finite values");
  const Vector dist = (codes.rowwise() - code.transpose()).rowwise().norm();
  const int n = static_cast<int>(codes.rows());
  const int k = std::min(options.n_neighbors, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int x, int y) {
    return dist(x) < dist(y) || (dist(x) == dist(y) && x < y);
  });
  if (dist(order[0]) == 0.0) return layout.row(order[0]).transpose();

  std::vector<double> d(k);
  for (int j = 0; j < k; ++j) d[j] = dist(order[j]);
  const std::vector<double> w = membership(d, std::max(k, 2));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  Vector p = Vector::Zero(layout.cols());
  for (int j = 0; j < k; ++j) p += (w[j] / total) * layout.row(order[j]).transpose();
  if (!refine) return p;

  const double max_w = *std::max_element(w.begin(), w.end());
  const double a = curve.a, b = curve.b;
  const int epochs = options.transform_epochs;
  for (int e = 0; e < epochs; ++e) {
    const double alpha = 0.25 * options.learning_rate * (1.0 - static_cast<double>(e) / epochs);
    for (int j = 0; j < k; ++j) {
      const auto other = layout.row(order[j]);
      const double d2 = (p.transpose() - other).squaredNorm();
      if (d2 <= 0.0) continue;
      const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
      for (Eigen::Index c = 0; c < p.size(); ++c) {
        p(c) += alpha * (w[j] / max_w) * clip(coeff * (p(c) - other(c)));
      }
    }
  }
  if (support_radius > 0.0 && d[0] > support_radius) {
    Vector dir = p - layout.colwise().mean().transpose();
    const double norm = dir.norm();
    if (norm > 0.0) {
      dir /= norm;
    } else {
      dir = Vector::Unit(p.size(), 0);
    }
    p += (d[0] / support_radius - 1.0) * scale() * dir;
  }
  return p;
}

Matrix LayoutModel::transform_batch(const Matrix& batch) const {
  Matrix out(batch.rows(), layout.cols());
  const long n = static_cast<long>(batch.rows());
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      out.row(i) = transform(batch.row(i).transpose()).transpose();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double trustworthiness(const Matrix& high, const Matrix& low, int k) {
  const auto n = static_cast<int>(high.rows());
  if (low.rows() != n) throw InvalidArgument("trustworthiness inputs differ in row count");
  if (k < 1 || 2 * n - 3 * k - 1 <= 0 || k >= n) {
    throw InvalidArgument("trustworthiness needs k < (2N - 1) / 3");
  }
  double penalty = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : penalty)
  for (int i = 0; i < n; ++i) {
    const Vector dh = (high.rowwise() - high.row(i)).rowwise().squaredNorm();
    const Vector dl = (low.rowwise() - low.row(i)).rowwise().squaredNorm();
    std::vector<int> order;
    order.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    auto by = [](const Vector& d) {
      return [&d](int x, int y) { return d(x) < d(y) || (d(x) == d(y) && x < y); };
    };
    std::vector<int> high_order = order;
    std::sort(high_order.begin(), high_order.end(), by(dh));
    std::vector<int> rank(n, 0);
    for (int r = 0; r < n - 1; ++r) rank[high_order[r]] = r + 1;
    std::partial_sort(order.begin(), order.begin() + k, order.end(), by(dl));
    for (int j = 0; j < k; ++j) {
      const int r = rank[order[j]];
      if (r > k) penalty += r - k;
    }
  }
  return 1.0 - 2.0 / (static_cast<double>(n) * k * (2.0 * n - 3.0 * k - 1.0)) * penalty;
}

}  // namespace mmcm
