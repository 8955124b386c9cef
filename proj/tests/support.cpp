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

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "mmcm/rng.hpp"
#include "mmcm/synthetic.hpp"

namespace mmcm::testing {

const MotionCorpus& synthetic_corpus() {
  static const MotionCorpus corpus = [] {
    const PipelineConfig config = PipelineConfig::for_preset("synthetic");
    SyntheticOptions options;
    options.min_track_length = config.past_frames + config.future_frames;
    const auto specs = default_family_specs();
    return generate_synthetic(specs, options, derive_seed(0, "corpus"));
  }();
  return corpus;
}

const FittedPipeline& synthetic_pipeline() {
  static const FittedPipeline pipeline =
      fit_pipeline(synthetic_corpus(), PipelineConfig::for_preset("synthetic"));
  return pipeline;
}

const std::vector<EvalSample>& synthetic_samples() {
  static const std::vector<EvalSample> samples =
      make_eval_samples(synthetic_corpus(), synthetic_pipeline().config, 100, derive_seed(0, "eval"));
  return samples;
}

MotionCorpus random_corpus(int tracks, int frames, const Skeleton& skeleton, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 0.02);
  std::uniform_real_distribution<double> start(-0.5, 0.5);
  MotionCorpus corpus{skeleton, 50.0, {}};
  for (int t = 0; t < tracks; ++t) {
    Track track;
    track.source_id = "walk/" + std::to_string(t);
    track.label = t % 3;
    Pose pose(skeleton.keypoint_count(), 3);
    for (Eigen::Index i = 0; i < pose.size(); ++i) pose.data()[i] = start(rng);
    for (int f = 0; f < frames; ++f) {
      for (Eigen::Index i = 0; i < pose.size(); ++i) pose.data()[i] += step(rng);
      track.frames.push_back(pose);
    }
    corpus.tracks.push_back(std::move(track));
  }
  return corpus;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

PlantedBlobs planted_blobs(std::span<const int> sizes, int dims, double radius, double separation,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Centers along orthogonal-ish random directions, rejected until far apart.
  std::vector<Vector> centers;
  while (centers.size() < sizes.size()) {
    Vector c(dims);
    for (int d = 0; d < dims; ++d) c[d] = normal(rng) * separation * 1.5;
    bool ok = true;
    for (const auto& o : centers) ok = ok && (o - c).norm() >= separation;
    if (ok) centers.push_back(c);
  }
  const int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  PlantedBlobs out{Matrix(n, dims), {}};
  int row = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    for (int i = 0; i < sizes[b]; ++i) {
      Vector dir(dims);
      for (int d = 0; d < dims; ++d) dir[d] = normal(rng);
      dir.normalize();
      const double r = radius * std::pow(unit(rng), 1.0 / dims);
      out.points.row(row++) = (centers[b] + r * dir).transpose();
      out.labels.push_back(static_cast<int>(b));
    }
  }
  return out;
}

std::vector<double> naive_core_distances(const Matrix& points, int min_samples) {
  const Eigen::Index n = points.rows();
  std::vector<double> cores(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) d.push_back((points.row(i) - points.row(j)).norm());
    }
    std::sort(d.begin(), d.end());
    cores[i] = d[min_samples - 1];
  }
  return cores;
}

double kruskal_mst_weight(const Matrix& points, std::span<const double> cores) {
  const int n = static_cast<int>(points.rows());
  struct Edge {
    double w;
    int a, b;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      edges.push_back({std::max({d, cores[i], cores[j]}), i, j});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  double total = 0.0;
  for (const auto& e : edges) {
    const int ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    total += e.w;
  }
  return total;
}

namespace {

// Full dendrogram node; leaves hold one point.
struct Node {
  std::vector<int> points;
  double height = 0.0;
  int left = -1;
  int right = -1;
};

struct Candidate {
  double birth = 0.0;
  double stability = 0.0;
  std::vector<int> points;
  std::vector<int> children;  // indices into the candidate list
};

// Walks the dendrogram below `node` while it stays the same condensed
// cluster, accumulating the stability of candidate `c`.
void descend(const std::vector<Node>& nodes, int node, int c, int min_size, std::vector<Candidate>& out) {
  const Node& n = nodes[node];
  if (n.left < 0) {
    // A single point never splits further; it leaves at lambda = infinity,
    // which only happens for duplicate points. Treat as leaving at birth.
    return;
  }
  const double lambda = n.height > 0.0 ? 1.0 / n.height : std::numeric_limits<double>::infinity();
  const Node& l = nodes[n.left];
  const Node& r = nodes[n.right];
  const bool big_l = static_cast<int>(l.points.size()) >= min_size;
  const bool big_r = static_cast<int>(r.points.size()) >= min_size;
  if (big_l && big_r) {
    out[c].stability += static_cast<double>(n.points.size()) * (lambda - out[c].birth);
    for (int child : {n.left, n.right}) {
      Candidate k;
      k.birth = lambda;
      k.points = nodes[child].points;
      out.push_back(std::move(k));
      const int id = static_cast<int>(out.size()) - 1;
      out[c].children.push_back(id);
      descend(nodes, child, id, min_size, out);
    }
    return;
  }
  if (!big_l) out[c].stability += static_cast<double>(l.points.size()) * (lambda - out[c].birth);
  if (!big_r) out[c].stability += static_cast<double>(r.points.size()) * (lambda - out[c].birth);
  if (big_l) descend(nodes, n.left, c, min_size, out);
  if (big_r) descend(nodes, n.right, c, min_size, out);
}

}  // namespace

std::vector<int> naive_density_clustering(const Matrix& points, int min_cluster_size, int min_samples) {
  const int n = static_cast<int>(points.rows());
  const auto cores = naive_core_distances(points, min_samples);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) d[i][j] = std::max({(points.row(i) - points.row(j)).norm(), cores[i], cores[j]});
    }
  }
  // Agglomerate: repeatedly merge the two active clusters at the smallest
  // single-linkage distance.
  std::vector<Node> nodes;
  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    nodes.push_back({{i}, 0.0, -1, -1});
    active.push_back(i);
  }
  std::vector<std::vector<double>> link = d;  // between active node slots
  std::vector<int> slot_node(n);
  std::iota(slot_node.begin(), slot_node.end(), 0);
  std::vector<bool> alive(n, true);
  for (int step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (alive[j] && link[i][j] < best) {
          best = link[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    Node merged;
    merged.height = best;
    merged.left = slot_node[bi];
    merged.right = slot_node[bj];
    merged.points = nodes[merged.left].points;
    merged.points.insert(merged.points.end(), nodes[merged.right].points.begin(),
                         nodes[merged.right].points.end());
    nodes.push_back(std::move(merged));
    for (int k = 0; k < n; ++k) link[bi][k] = link[k][bi] = std::min(link[bi][k], link[bj][k]);
    alive[bj] = false;
    slot_node[bi] = static_cast<int>(nodes.size()) - 1;
  }

  std::vector<Candidate> cands(1);
  cands[0].birth = 0.0;
  cands[0].points = nodes.back().points;
  descend(nodes, static_cast<int>(nodes.size()) - 1, 0, min_cluster_size, cands);

  // Excess of mass, bottom-up; children always have larger indices.
  std::vector<double> best(cands.size());
  std::vector<bool> selected(cands.size(), false);
  for (int c = static_cast<int>(cands.size()) - 1; c >= 0; --c) {
    double child_sum = 0.0;
    for (int k : cands[c].children) child_sum += best[k];
    if (c == 0) break;
    if (cands[c].children.empty() || cands[c].stability >= child_sum) {
      best[c] = cands[c].stability;
      selected[c] = true;
    } else {
      best[c] = child_sum;
    }
  }
  // Keep only the topmost selected clusters.
  std::vector<int> labels(n, -1);
  std::vector<int> stack = cands[0].children;
  int next = 0;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    if (selected[c]) {
      for (int p : cands[c].points) labels[p] = next;
      ++next;
    } else {
      stack.insert(stack.end(), cands[c].children.begin(), cands[c].children.end());
    }
  }
  return labels;
}

bool same_partition(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [it, fresh] = ab.emplace(a[i], b[i]);
    if (!fresh && it->second != b[i]) return false;
    auto [jt, fresh2] = ba.emplace(b[i], a[i]);
    if (!fresh2 && jt->second != a[i]) return false;
  }
  return true;
}

std::vector<SourcePosition> exhaustive_mmgt_positions(const MotionSequence& query, const MotionCorpus& corpus,
                                                      const MmgtConfig& config, int future_frames) {
  const int w = config.past_window_frames;
  const int k = corpus.skeleton.keypoint_count();
  std::vector<SourcePosition> out;
  for (int t = 0; t < static_cast<int>(corpus.tracks.size()); ++t) {
    const auto& frames = corpus.tracks[t].frames;
    for (int f = 0; f < static_cast<int>(frames.size()); ++f) {
      if (f < w || f + future_frames > static_cast<int>(frames.size())) continue;
      double sq = 0.0;
      for (int i = 0; i < w; ++i) {
        const Pose& a = query.past[query.past.size() - w + i];
        const Pose& b = frames[f - w + i];
        for (int j = 0; j < k; ++j) {
          for (int c = 0; c < 3; ++c) {
            double x = a(j, c), y = b(j, c);
            if (config.root_relative) {
              x -= a(0, c);
              y -= b(0, c);
            }
            sq += (x - y) * (x - y);
          }
        }
      }
      if (std::sqrt(sq) > config.similarity_threshold) continue;
      const SourcePosition pos{t, f};
      if (!config.include_self && query.origin && *query.origin == pos) continue;
      out.push_back(pos);
    }
  }
  return out;
}

}  // namespace mmcm::testing
