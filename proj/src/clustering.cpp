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

#include "mmcm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "mmcm/binary_io.hpp"
#include "mmcm/error.hpp"

namespace mmcm {
namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

// Binary single-linkage tree. Nodes [0, leaves) are leaves; each leaf may
// stand for several duplicate points.
struct Dendrogram {
  std::vector<std::vector<int>> leaf_points;
  std::vector<int> left, right, size;
  std::vector<double> distance;

  int leaf_count() const { return static_cast<int>(leaf_points.size()); }
  int node_count() const { return leaf_count() + static_cast<int>(left.size()); }
  bool is_leaf(int node) const { return node < leaf_count(); }
  int node_size(int node) const {
    return is_leaf(node) ? static_cast<int>(leaf_points[node].size()) : size[node - leaf_count()];
  }
};

Dendrogram build_dendrogram(std::span<const MstEdge> mst, int n) {
  std::vector<MstEdge> edges(mst.begin(), mst.end());
  std::stable_sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (std::min(x.a, x.b) != std::min(y.a, y.b)) return std::min(x.a, x.b) < std::min(y.a, y.b);
    return std::max(x.a, x.b) < std::max(y.a, y.b);
  });
  // Zero-weight edges join exact duplicates into one leaf.
  UnionFind dup(n);
  for (const auto& e : edges) {
    if (e.weight == 0.0) dup.parent[dup.find(e.a)] = dup.find(e.b);
  }
  Dendrogram d;
  std::vector<int> leaf_of(n, -1);
  std::vector<int> root_leaf(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = dup.find(i);
    if (root_leaf[r] < 0) {
      root_leaf[r] = d.leaf_count();
      d.leaf_points.emplace_back();
    }
    leaf_of[i] = root_leaf[r];
    d.leaf_points[root_leaf[r]].push_back(i);
  }
  const int leaves = d.leaf_count();
  UnionFind uf(2 * leaves);
  std::vector<int> node_of(2 * leaves);
  std::iota(node_of.begin(), node_of.end(), 0);
  int next = leaves;
  for (const auto& e : edges) {
    if (e.weight == 0.0) continue;
    const int ra = uf.find(leaf_of[e.a]);
    const int rb = uf.find(leaf_of[e.b]);
    if (ra == rb) continue;
    const int na = node_of[ra], nb = node_of[rb];
    d.left.push_back(na);
    d.right.push_back(nb);
    d.distance.push_back(e.weight);
    d.size.push_back(d.node_size(na) + d.node_size(nb));
    uf.parent[ra] = next;
    uf.parent[rb] = next;
    node_of[next] = next;
    ++next;
  }
  return d;
}

void collect_points(const Dendrogram& d, int node, std::vector<int>& out) {
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    if (d.is_leaf(x)) {
      out.insert(out.end(), d.leaf_points[x].begin(), d.leaf_points[x].end());
    } else {
      stack.push_back(d.right[x - d.leaf_count()]);
      stack.push_back(d.left[x - d.leaf_count()]);
    }
  }
}

}  // namespace

ClusterConfig ClusterConfig::for_preset(std::string_view preset) {
  ClusterConfig c;
  c.min_cluster_size = preset == "amass" ? 50 : 15;
  return c;
}

void ClusterConfig::validate() const {
  if (min_cluster_size < 2) throw InvalidArgument("min_cluster_size must be at least 2");
  if (min_samples < 1) throw InvalidArgument("min_samples must be at least 1");
}

double ModeTable::noise_rate() const {
  if (labels.empty()) return 0.0;
  const auto noise = std::count(labels.begin(), labels.end(), kNoise);
  return static_cast<double>(noise) / static_cast<double>(labels.size());
}

double ModeTable::mean_persistence() const {
  if (modes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& m : modes) s += m.persistence;
  return s / static_cast<double>(modes.size());
}

void ModeTable::compute_centroids(const Matrix& points) {
  if (points.rows() != point_count) throw InvalidArgument("point count does not match mode table");
  for (auto& m : modes) {
    Vector c = Vector::Zero(points.cols());
    for (int i : m.members) c += points.row(i).transpose();
    m.centroid = c / static_cast<double>(m.members.size());
  }
}

std::vector<double> core_distances(const Matrix& points, int min_samples) {
  const auto n = static_cast<int>(points.rows());
  if (min_samples < 1) throw InvalidArgument("min_samples must be at least 1");
  if (n <= min_samples) {
    throw InvalidArgument("core distances need N > min_samples (N = " + std::to_string(n) +
                          ", min_samples = " + std::to_string(min_samples) + ")");
  }
  std::vector<double> core(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    Vector d = (points.rowwise() - points.row(i)).rowwise().norm();
    std::vector<double> others;
    others.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(d(j));
    }
    std::nth_element(others.begin(), others.begin() + (min_samples - 1), others.end());
    core[i] = others[min_samples - 1];
  }
  return core;
}

std::vector<MstEdge> mutual_reachability_mst(const Matrix& points, std::span<const double> cores) {
  const auto n = static_cast<int>(points.rows());
  if (static_cast<int>(cores.size()) != n) throw InvalidArgument("one core distance per point required");
  std::vector<MstEdge> out;
  if (n < 2) return out;
  out.reserve(n - 1);
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> from(n, -1);
  int current = 0;
  in_tree[0] = 1;
  for (int step = 1; step < n; ++step) {
    int pick = -1;
    for (int j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = (points.row(current) - points.row(j)).norm();
      const double m = std::max({cores[current], cores[j], d});
      if (m < best[j]) {
        best[j] = m;
        from[j] = current;
      }
      if (pick < 0 || best[j] < best[pick]) pick = j;
    }
    out.push_back({from[pick], pick, best[pick]});
    in_tree[pick] = 1;
    current = pick;
  }
  return out;
}

ModeTable condense_and_extract(std::span<const MstEdge> mst, int n, const ClusterConfig& config) {
  config.validate();
  if (n < 1) throw InvalidArgument("clustering needs at least one point");
  if (static_cast<int>(mst.size()) != n - 1) {
    throw InvalidArgument("MST over " + std::to_string(n) + " points must have " +
                          std::to_string(n - 1) + " edges, got " + std::to_string(mst.size()));
  }
  const Dendrogram d = build_dendrogram(mst, n);
  if (d.node_count() != 2 * d.leaf_count() - 1) throw InvalidArgument("MST edges do not span all points");
  const int mcs = config.min_cluster_size;

  ModeTable table;
  table.point_count = n;
  table.labels.assign(n, kNoise);

  // Condensation. Cluster ids start at n; the root is n.
  std::vector<double> birth{0.0};
  std::vector<int> cluster_parent{-1};
  struct Pending {
    int node;
    int cluster;
  };
  std::vector<Pending> stack{{d.node_count() - 1, n}};
  auto fall_out = [&](int node, int cluster, double lambda) {
    std::vector<int> pts;
    collect_points(d, node, pts);
    std::sort(pts.begin(), pts.end());
    for (int p : pts) table.condensed.push_back({cluster, p, lambda, 1});
  };
  while (!stack.empty()) {
    const auto [node, cluster] = stack.back();
    stack.pop_back();
    if (d.is_leaf(node)) {
      // A duplicate group large enough to persist; its points leave at the
      // density at which the group was last split from.
      fall_out(node, cluster, birth[cluster - n]);
      continue;
    }
    const int idx = node - d.leaf_count();
    const double lambda = 1.0 / d.distance[idx];
    const int l = d.left[idx], r = d.right[idx];
    const int ls = d.node_size(l), rs = d.node_size(r);
    if (ls >= mcs && rs >= mcs) {
      const int pushed[2] = {r, l};
      const int sizes[2] = {rs, ls};
      int ids[2];
      for (int s = 1; s >= 0; --s) {
        ids[s] = n + static_cast<int>(birth.size());
        birth.push_back(lambda);
        cluster_parent.push_back(cluster);
        table.condensed.push_back({cluster, ids[s], lambda, sizes[s]});
      }
      stack.push_back({pushed[0], ids[0]});
      stack.push_back({pushed[1], ids[1]});
    } else if (ls < mcs && rs < mcs) {
      fall_out(l, cluster, lambda);
      fall_out(r, cluster, lambda);
    } else if (ls < mcs) {
      fall_out(l, cluster, lambda);
      stack.push_back({r, cluster});
    } else {
      fall_out(r, cluster, lambda);
      stack.push_back({l, cluster});
    }
  }

  const int clusters = static_cast<int>(birth.size());
  std::vector<double> stability(clusters, 0.0);
  for (const auto& e : table.condensed) {
    stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.child_size;
  }
  std::vector<std::vector<int>> children(clusters);
  for (int c = 1; c < clusters; ++c) children[cluster_parent[c] - n].push_back(c);

  // Excess of mass, bottom-up. Children always carry larger ids than parents.
  std::vector<char> selected(clusters, 0);
  std::vector<double> subtree(stability);
  for (int c = clusters - 1; c >= 1; --c) {
    double child_sum = 0.0;
    for (int ch : children[c]) child_sum += subtree[ch];
    if (children[c].empty() || stability[c] >= child_sum) {
      selected[c] = 1;
      subtree[c] = stability[c];
      std::vector<int> st(children[c].begin(), children[c].end());
      while (!st.empty()) {
        const int x = st.back();
        st.pop_back();
        selected[x] = 0;
        st.insert(st.end(), children[x].begin(), children[x].end());
      }
    } else {
      subtree[c] = child_sum;
    }
  }

  // Each point belongs to the selected ancestor of the cluster it fell out of.
  std::vector<int> owner(clusters, -1);
  for (int c = 1; c < clusters; ++c) {
    const int p = cluster_parent[c] - n;
    owner[c] = selected[c] ? c : (p >= 0 ? owner[p] : -1);
  }
  std::vector<std::vector<int>> members(clusters);
  for (const auto& e : table.condensed) {
    if (e.child_size != 1 || e.child >= n) continue;
    const int o = owner[e.parent - n];
    if (o > 0) members[o].push_back(e.child);
  }
  std::vector<int> chosen;
  for (int c = 1; c < clusters; ++c) {
    if (selected[c] && !members[c].empty()) {
      std::sort(members[c].begin(), members[c].end());
      chosen.push_back(c);
    }
  }
  std::sort(chosen.begin(), chosen.end(),
            [&](int x, int y) { return members[x].front() < members[y].front(); });
  for (int id = 0; id < static_cast<int>(chosen.size()); ++id) {
    Mode m;
    m.id = id;
    m.members = std::move(members[chosen[id]]);
    m.persistence = stability[chosen[id]];
    for (int p : m.members) table.labels[p] = id;
    table.modes.push_back(std::move(m));
  }
  return table;
}

ModeTable fit_modes(const Matrix& points, const ClusterConfig& config) {
  config.validate();
  const auto n = static_cast<int>(points.rows());
  ModeTable table;
  if (n <= config.min_samples) {
    table.point_count = n;
    table.labels.assign(n, kNoise);
    return table;
  }
  const std::vector<double> cores = core_distances(points, config.min_samples);
  const std::vector<MstEdge> mst = mutual_reachability_mst(points, cores);
  table = condense_and_extract(mst, n, config);
  table.compute_centroids(points);
  return table;
}

ModeTable fit_modes(const LayoutModel& layout, const ClusterConfig& config) {
  if (!layout.fitted()) throw InvalidArgument("layout is not fitted");
  return fit_modes(layout.layout, config);
}

std::vector<StabilityRow> rank_stability(std::vector<StabilityRow> rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (rows[x].score != rows[y].score) return rows[x].score > rows[y].score;
    return rows[x].mode_count < rows[y].mode_count;
  });
  std::vector<StabilityRow> out;
  out.reserve(rows.size());
  for (auto i : order) out.push_back(rows[i]);
  return out;
}

std::vector<StabilityRow> sweep_stability(const Matrix& codes, std::span<const ClusterConfig> configs,
                                          std::span<const int> layout_dims,
                                          const LayoutOptions& base) {
  if (configs.empty() || layout_dims.empty()) throw InvalidArgument("stability sweep grid is empty");
  std::vector<StabilityRow> rows;
  for (int dims : layout_dims) {
    LayoutOptions o = base;
    o.dims = dims;
    const LayoutModel layout = fit_layout(codes, o);
    for (const auto& cfg : configs) {
      const ModeTable t = fit_modes(layout, cfg);
      StabilityRow row;
      row.config = cfg;
      row.layout_dims = dims;
      row.mode_count = t.mode_count();
      row.noise_rate = t.noise_rate();
      row.mean_persistence = t.mean_persistence();
      row.score = row.mean_persistence * (1.0 - row.noise_rate);
      rows.push_back(row);
    }
  }
  return rank_stability(std::move(rows));
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InvalidArgument("label vectors differ in length");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ca[a[i]] += 1;
    cb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sum_joint = 0, sum_a = 0, sum_b = 0;
  for (const auto& [k, v] : joint) sum_joint += c2(v);
  for (const auto& [k, v] : ca) sum_a += c2(v);
  for (const auto& [k, v] : cb) sum_b += c2(v);
  const double expected = sum_a * sum_b / c2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

void write_mode_csv(const ModeTable& table, const Matrix& points, const std::filesystem::path& path) {
  if (points.rows() != table.point_count) throw InvalidArgument("point count does not match mode table");
  std::ostringstream out;
  out.precision(17);
  out << "point,mode";
  for (Eigen::Index c = 0; c < points.cols(); ++c) out << ",x" << c;
  out << "\n";
  for (int i = 0; i < table.point_count; ++i) {
    out << i << "," << table.labels[i];
    for (Eigen::Index c = 0; c < points.cols(); ++c) out << "," << points(i, c);
    out << "\n";
  }
  write_file_atomic(path, out.str());
}

}  // namespace mmcm
