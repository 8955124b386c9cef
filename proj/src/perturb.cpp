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

#include "mmcm/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "mmcm/error.hpp"
#include "mmcm/rng.hpp"

namespace mmcm {
namespace {

std::vector<ModeAssignment> assign_all(const FittedPipeline& p, const PoseSequence& past,
                                       std::span<const PoseSequence> futures) {
  std::vector<ModeAssignment> out;
  out.reserve(futures.size());
  for (const auto& f : futures) out.push_back(p.assign_mode(past, f));
  return out;
}

std::vector<PoseSequence> member_futures(const MmgtSet& set) {
  std::vector<PoseSequence> out;
  out.reserve(set.members.size());
  for (const auto& m : set.members) out.push_back(m.future);
  return out;
}

// Scores one sample from assignments computed elsewhere.
SampleScore score_assigned(const EvalSample& sample, std::vector<ModeAssignment> mmgt_assign,
                           std::span<const PoseSequence> futures,
                           std::vector<ModeAssignment> prediction_assign) {
  SampleScore s;
  s.id = sample.query.source_id;
  s.mmgts = std::move(mmgt_assign);
  s.predictions = std::move(prediction_assign);
  score_modes(s);
  s.apd = apd(futures);
  if (!sample.mmgt.empty()) s.mmade_mmfde = mmade_mmfde(futures, sample.mmgt);
  return s;
}

SweepLevel summarize_level(double level, std::vector<SampleScore> scores, int flagged) {
  MetricReport r;
  r.samples = std::move(scores);
  SweepLevel l;
  l.level = level;
  l.flagged = flagged;
  if (r.samples.empty()) return l;
  aggregate(r);
  l.mmcm = r.mmcm;
  l.coverage = r.coverage;
  l.validity = r.validity;
  l.apd = r.apd;
  l.mmade = r.mmade;
  l.mmfde = r.mmfde;
  l.samples = static_cast<int>(r.samples.size());
  l.predictions = r.prediction_count;
  return l;
}

std::vector<std::vector<ModeAssignment>> assign_mmgts(const FittedPipeline& p,
                                                      std::span<const EvalSample> samples) {
  std::vector<std::vector<ModeAssignment>> out(samples.size());
  const long n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    out[i] = assign_all(p, samples[i].query.past, member_futures(samples[i].mmgt));
  }
  return out;
}

void check_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw InvalidArgument(std::string(what) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument(std::string(what) + " grid must be strictly increasing");
  }
}

std::uint64_t item_seed(std::uint64_t base, std::size_t sample, std::size_t item) {
  return derive_seed(base, (static_cast<std::uint64_t>(sample) << 24) ^ item);
}

// Predictions for every sample built by `make`, then scored.
template <typename Make>
SweepLevel perturbed_level(const FittedPipeline& p, std::span<const EvalSample> samples,
                           const std::vector<std::vector<ModeAssignment>>& mmgt_assign, double level,
                           Make make) {
  std::vector<SampleScore> scores(samples.size());
  const long n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const std::vector<PoseSequence> futures = make(static_cast<std::size_t>(i));
    // Futures left unchanged by the perturbation keep their member's mode.
    const auto& members = samples[i].mmgt.members;
    std::vector<ModeAssignment> assigned;
    assigned.reserve(futures.size());
    for (std::size_t j = 0; j < futures.size(); ++j) {
      const bool same = j < members.size() && futures[j] == members[j].future;
      assigned.push_back(same ? mmgt_assign[i][j] : p.assign_mode(samples[i].query.past, futures[j]));
    }
    scores[i] = score_assigned(samples[i], mmgt_assign[i], futures, std::move(assigned));
  }
  return summarize_level(level, std::move(scores), 0);
}

}  // namespace

std::vector<EvalSample> make_eval_samples(const MotionCorpus& corpus, const PipelineConfig& config,
                                          int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be positive");
  const int b = config.past_frames, t = config.future_frames;
  std::vector<SourcePosition> eligible;
  for (int ti = 0; ti < static_cast<int>(corpus.tracks.size()); ++ti) {
    const int n = static_cast<int>(corpus.tracks[ti].frames.size());
    for (int f = b; f + t <= n; ++f) eligible.push_back({ti, f});
  }
  if (static_cast<int>(eligible.size()) < count) {
    throw InvalidArgument("corpus holds " + std::to_string(eligible.size()) +
                          " eligible positions, " + std::to_string(count) + " requested");
  }
  Rng rng(derive_seed(seed, "eval-samples"));
  for (int i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng() % (eligible.size() - i));
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end(), [](const SourcePosition& x, const SourcePosition& y) {
    return x.track != y.track ? x.track < y.track : x.frame < y.frame;
  });
  MmgtMiner miner(corpus, config.mmgt, t);
  std::vector<EvalSample> out(eligible.size());
  const long n = static_cast<long>(eligible.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    out[i].query = corpus.sequence_at(eligible[i].track, eligible[i].frame, b, t);
    out[i].mmgt = miner.mine(out[i].query);
  }
  return out;
}

PoseSequence inject_joint_noise(const PoseSequence& future, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  PoseSequence out = future;
  if (sigma == 0.0) return out;
  Rng rng(derive_seed(seed, "joint-noise"));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& pose : out) {
    const Eigen::RowVector3d root = pose.row(0);
    for (Eigen::Index i = 0; i < pose.size(); ++i) pose.data()[i] += sigma * normal(rng);
    pose.rowwise() += root - pose.row(0);
  }
  return out;
}

PoseSequence scale_bones(const PoseSequence& future, const Skeleton& skeleton,
                         std::span<const int> bone_indices, double factor) {
  if (!(factor > 0.0)) throw InvalidArgument("bone scale factor must be positive");
  const auto& bones = skeleton.bones();
  for (int b : bone_indices) {
    if (b < 0 || b >= static_cast<int>(bones.size())) {
      throw InvalidArgument("bone index " + std::to_string(b) + " out of range");
    }
  }
  PoseSequence out = future;
  for (int b : bone_indices) {
    const std::vector<int> moved = skeleton.subtree(bones[b].child);
    for (auto& pose : out) {
      if (pose.rows() != skeleton.keypoint_count()) throw InvalidArgument("pose does not match skeleton");
      const Eigen::RowVector3d offset = (factor - 1.0) * (pose.row(bones[b].child) - pose.row(bones[b].parent));
      for (int j : moved) pose.row(j) += offset;
    }
  }
  return out;
}

std::vector<int> choose_bones(const Skeleton& skeleton, int count, std::uint64_t seed) {
  const int n = static_cast<int>(skeleton.bones().size());
  if (count < 0 || count > n) throw InvalidArgument("cannot choose " + std::to_string(count) + " bones");
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  Rng rng(derive_seed(seed, "bones"));
  for (int i = 0; i < count; ++i) std::swap(all[i], all[i + static_cast<int>(rng() % (n - i))]);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

bool length_abnormal(const Pose& last_past, const PoseSequence& future, const Skeleton& skeleton,
                     double ratio) {
  const std::vector<double> ref = bone_lengths(last_past, skeleton);
  for (const auto& pose : future) {
    const std::vector<double> len = bone_lengths(pose, skeleton);
    for (std::size_t b = 0; b < len.size(); ++b) {
      if (ref[b] > 0.0 && std::abs(len[b] - ref[b]) >= ratio * ref[b]) return true;
    }
  }
  return false;
}

double discontinuity(const Pose& last_past, const MotionCorpus& corpus, SourcePosition start) {
  if (start.track < 0 || start.track >= static_cast<int>(corpus.tracks.size()) || start.frame < 1 ||
      start.frame > static_cast<int>(corpus.tracks[start.track].frames.size())) {
    throw InvalidArgument("future start has no preceding frame");
  }
  const Pose& before = corpus.tracks[start.track].frames[start.frame - 1];
  return pose_distance(root_center(last_past), root_center(before));
}

int bucket_of(double value, std::span<const double> edges) {
  if (edges.empty() || value < edges.front()) return -1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<int>(it - edges.begin()) - 1;
}

MismatchBuckets make_mismatched(const MotionCorpus& corpus, std::span<const MotionSequence> pasts,
                                int future_frames, std::span<const double> edges, int per_bucket,
                                std::uint64_t seed) {
  check_grid(edges, "mismatch bucket");
  if (per_bucket < 1) throw InvalidArgument("per_bucket must be positive");
  std::vector<SourcePosition> starts;
  for (int ti = 0; ti < static_cast<int>(corpus.tracks.size()); ++ti) {
    const int n = static_cast<int>(corpus.tracks[ti].frames.size());
    for (int f = 1; f + future_frames <= n; ++f) starts.push_back({ti, f});
  }
  if (starts.empty()) throw InvalidArgument("corpus has no future of the requested length");
  const std::size_t nb = edges.size();
  MismatchBuckets out;
  out.edges.assign(edges.begin(), edges.end());
  out.buckets.assign(nb, std::vector<std::vector<MismatchedFuture>>(pasts.size()));
  out.achieved.assign(nb, 0);
  const std::size_t budget = std::min<std::size_t>(starts.size(), 400 * per_bucket * nb);
  for (std::size_t s = 0; s < pasts.size(); ++s) {
    if (pasts[s].past.empty()) throw InvalidArgument("past is empty");
    Rng rng(item_seed(derive_seed(seed, "mismatch"), s, 0));
    // A random order over all candidate starts, truncated to the budget.
    std::vector<std::size_t> order(starts.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < budget; ++i) {
      std::swap(order[i], order[i + static_cast<std::size_t>(rng() % (order.size() - i))]);
    }
    std::size_t filled = 0;
    for (std::size_t i = 0; i < budget && filled < nb; ++i) {
      const SourcePosition src = starts[order[i]];
      const double d = discontinuity(pasts[s].past.back(), corpus, src);
      const int b = bucket_of(d, edges);
      if (b < 0 || static_cast<int>(out.buckets[b][s].size()) >= per_bucket) continue;
      MismatchedFuture m;
      m.sample = static_cast<int>(s);
      m.source = src;
      m.discontinuity = d;
      const auto& frames = corpus.tracks[src.track].frames;
      m.future.assign(frames.begin() + src.frame, frames.begin() + src.frame + future_frames);
      out.buckets[b][s].push_back(std::move(m));
      ++out.achieved[b];
      if (static_cast<int>(out.buckets[b][s].size()) == per_bucket) ++filled;
    }
  }
  return out;
}

std::vector<double> default_noise_grid() { return {0.0, 0.02, 0.05, 0.1, 0.2, 0.5}; }
std::vector<double> default_bone_factors() { return {1.0, 1.25, 1.5, 2.0}; }
std::vector<double> default_mismatch_edges() { return {0.0, 0.1, 0.25, 0.5, 1.0}; }
std::vector<double> default_removal_grid() { return {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0}; }
std::vector<int> default_addition_counts() { return {0, 5, 10, 20, 40}; }

SweepResult run_noise_sweep(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                            std::span<const double> sigmas, std::uint64_t seed) {
  check_grid(sigmas, "noise");
  if (sigmas.front() < 0.0) throw InvalidArgument("noise sigma must be non-negative");
  const auto mmgt_assign = assign_mmgts(pipeline, samples);
  SweepResult r{"joint_noise", "sigma", {}};
  const std::uint64_t base = derive_seed(seed, "noise-sweep");
  for (double sigma : sigmas) {
    r.levels.push_back(perturbed_level(pipeline, samples, mmgt_assign, sigma, [&](std::size_t i) {
      std::vector<PoseSequence> futures = member_futures(samples[i].mmgt);
      for (std::size_t j = 0; j < futures.size(); ++j) {
        futures[j] = inject_joint_noise(futures[j], sigma, item_seed(base, i, j));
      }
      return futures;
    }));
  }
  return r;
}

SweepResult run_bone_sweep(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                           std::span<const double> factors, int bones_per_future, std::uint64_t seed) {
  check_grid(factors, "bone scale");
  const auto mmgt_assign = assign_mmgts(pipeline, samples);
  SweepResult r{"bone_scale", "factor", {}};
  const std::uint64_t base = derive_seed(seed, "bone-sweep");
  for (double factor : factors) {
    r.levels.push_back(perturbed_level(pipeline, samples, mmgt_assign, factor, [&](std::size_t i) {
      std::vector<PoseSequence> futures = member_futures(samples[i].mmgt);
      for (std::size_t j = 0; j < futures.size(); ++j) {
        const auto bones = choose_bones(pipeline.skeleton, bones_per_future, item_seed(base, i, j));
        futures[j] = scale_bones(futures[j], pipeline.skeleton, bones, factor);
      }
      return futures;
    }));
  }
  return r;
}

SweepResult run_mismatch_sweep(const FittedPipeline& pipeline, const MotionCorpus& corpus,
                               std::span<const EvalSample> samples, std::span<const double> edges,
                               int per_bucket, std::uint64_t seed) {
  std::vector<MotionSequence> pasts;
  for (const auto& s : samples) pasts.push_back(s.query);
  const MismatchBuckets mb =
      make_mismatched(corpus, pasts, pipeline.config.future_frames, edges, per_bucket, seed);
  const auto mmgt_assign = assign_mmgts(pipeline, samples);
  SweepResult r{"mismatch", "discontinuity", {}};
  for (std::size_t b = 0; b < edges.size(); ++b) {
    std::vector<SampleScore> scores;
    int flagged = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& entries = mb.buckets[b][i];
      if (entries.empty()) {
        ++flagged;
        continue;
      }
      std::vector<PoseSequence> futures;
      for (const auto& e : entries) futures.push_back(e.future);
      scores.push_back(score_assigned(samples[i], mmgt_assign[i], futures,
                                      assign_all(pipeline, samples[i].query.past, futures)));
    }
    r.levels.push_back(summarize_level(edges[b], std::move(scores), flagged));
  }
  return r;
}

SweepResult run_rare_mode_removal(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                                  std::span<const double> percents) {
  check_grid(percents, "removal");
  if (percents.front() < 0.0) throw InvalidArgument("removal percentages must be non-negative");
  const auto mmgt_assign = assign_mmgts(pipeline, samples);
  SweepResult r{"rare_mode_removal", "percent", {}};
  for (double v : percents) {
    std::vector<SampleScore> scores;
    int flagged = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& assign = mmgt_assign[i];
      const std::vector<PoseSequence> all = member_futures(samples[i].mmgt);
      std::map<int, int> counts;
      for (const auto& a : assign) {
        if (a.mode != kAbnormal) ++counts[a.mode];
      }
      const double limit = v / 100.0 * static_cast<double>(all.size());
      std::vector<PoseSequence> kept;
      std::vector<ModeAssignment> kept_assign;
      for (std::size_t j = 0; j < all.size(); ++j) {
        const int m = assign[j].mode;
        if (m != kAbnormal && counts[m] <= limit) continue;
        kept.push_back(all[j]);
        kept_assign.push_back(assign[j]);
      }
      if (kept.empty()) {
        ++flagged;
        continue;
      }
      scores.push_back(score_assigned(samples[i], assign, kept, std::move(kept_assign)));
    }
    r.levels.push_back(summarize_level(v, std::move(scores), flagged));
  }
  return r;
}

SweepResult run_noisy_addition(const FittedPipeline& pipeline, std::span<const EvalSample> samples,
                               std::span<const int> counts, double sigma, std::uint64_t seed) {
  if (counts.empty()) throw InvalidArgument("addition count grid is empty");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0 || (i > 0 && counts[i] <= counts[i - 1])) {
      throw InvalidArgument("addition counts must be non-negative and strictly increasing");
    }
  }
  const auto mmgt_assign = assign_mmgts(pipeline, samples);
  const int max_count = counts.back();
  const std::uint64_t base = derive_seed(seed, "noisy-addition");
  std::vector<std::vector<PoseSequence>> noisy(samples.size());
  std::vector<std::vector<ModeAssignment>> noisy_assign(samples.size());
  const long n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto& members = samples[i].mmgt.members;
    if (members.empty()) continue;
    for (int a = 0; a < max_count; ++a) {
      noisy[i].push_back(inject_joint_noise(members[a % members.size()].future, sigma,
                                            item_seed(base, static_cast<std::size_t>(i), a)));
    }
    noisy_assign[i] = assign_all(pipeline, samples[i].query.past, noisy[i]);
  }
  SweepResult r{"noisy_addition", "count", {}};
  for (int c : counts) {
    std::vector<SampleScore> scores;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::vector<PoseSequence> futures = member_futures(samples[i].mmgt);
      std::vector<ModeAssignment> assign = mmgt_assign[i];
      futures.insert(futures.end(), noisy[i].begin(), noisy[i].begin() + std::min<int>(c, noisy[i].size()));
      assign.insert(assign.end(), noisy_assign[i].begin(),
                    noisy_assign[i].begin() + std::min<int>(c, noisy_assign[i].size()));
      scores.push_back(score_assigned(samples[i], mmgt_assign[i], futures, std::move(assign)));
    }
    r.levels.push_back(summarize_level(c, std::move(scores), 0));
  }
  return r;
}

SweepLevel score_ground_truth_only(const FittedPipeline& pipeline, std::span<const EvalSample> samples) {
  const auto mmgt_assign = assign_mmgts(pipeline, samples);
  std::vector<SampleScore> scores;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::vector<PoseSequence> futures{samples[i].query.future};
    scores.push_back(score_assigned(samples[i], mmgt_assign[i], futures,
                                    assign_all(pipeline, samples[i].query.past, futures)));
  }
  return summarize_level(0.0, std::move(scores), 0);
}

double relative_degradation(double value, double best, double reference) {
  const double span = reference - best;
  return span == 0.0 ? 0.0 : (value - best) / span;
}

PredictionSet make_surrogate(const FittedPipeline& pipeline, const EvalSample& sample, int top_modes,
                             int prediction_count) {
  if (prediction_count < 1) throw InvalidArgument("surrogate needs at least one prediction");
  if (sample.mmgt.empty()) throw InvalidArgument("surrogate needs a non-empty MMGT set");
  const auto assign = assign_all(pipeline, sample.query.past, member_futures(sample.mmgt));
  std::map<int, std::vector<int>> by_mode;
  for (std::size_t j = 0; j < assign.size(); ++j) {
    if (assign[j].mode != kAbnormal) by_mode[assign[j].mode].push_back(static_cast<int>(j));
  }
  std::vector<std::vector<int>> groups;
  for (auto& [mode, members] : by_mode) groups.push_back(std::move(members));
  // Most populated first; std::map order already breaks ties by mode id.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& x, const auto& y) { return x.size() > y.size(); });
  if (top_modes > 0 && static_cast<int>(groups.size()) > top_modes) groups.resize(top_modes);
  if (groups.empty()) {
    groups.emplace_back(sample.mmgt.members.size());
    std::iota(groups.back().begin(), groups.back().end(), 0);
  }
  PredictionSet p;
  p.past = sample.query.past;
  p.ground_truth = sample.query.future;
  p.source_id = sample.query.source_id;
  p.origin = sample.query.origin;
  for (int r = 0; static_cast<int>(p.futures.size()) < prediction_count; ++r) {
    for (const auto& g : groups) {
      if (static_cast<int>(p.futures.size()) == prediction_count) break;
      p.futures.push_back(sample.mmgt.members[g[r % g.size()]].future);
    }
  }
  return p;
}

std::vector<SweepGridPoint> default_sweep_grid() {
  std::vector<SweepGridPoint> grid;
  for (int dims : {2, 3, 5}) {
    for (int mcs : {10, 15, 30}) {
      for (int ms : {1, 5}) grid.push_back({dims, {mcs, ms}});
    }
  }
  return grid;
}

std::vector<RankingRow> run_hyperparameter_sweep(
    const MotionCorpus& corpus, const PipelineConfig& base, const EncoderModel& encoder,
    std::span<const EvalSample> samples, std::span<const std::vector<PredictionSet>> methods,
    std::span<const SweepGridPoint> grid) {
  if (methods.size() < 2) throw InvalidArgument("the ranking sweep needs at least two methods");
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  for (const auto& m : methods) {
    if (m.size() != samples.size()) throw InvalidArgument("each method needs one prediction set per sample");
  }
  base.validate();
  WindowSpec spec = base.window;
  spec.future_frames = base.future_frames;

  // Codes do not depend on the grid point, only on the shared encoder.
  const Matrix train_codes = encoder.encode_batch(mine_windows(corpus, spec).rows);
  WindowSpec cal_spec = spec;
  cal_spec.stride = base.calibration_stride;
  const Matrix cal_codes = encoder.encode_batch(mine_windows(corpus, cal_spec).rows);
  auto encode_all = [&](const PoseSequence& past, std::span<const PoseSequence> futures) {
    std::vector<Vector> out;
    for (const auto& f : futures) out.push_back(encoder.encode(window_vector(past, f, spec)));
    return out;
  };
  std::vector<std::vector<Vector>> mmgt_codes(samples.size());
  std::vector<std::vector<std::vector<Vector>>> method_codes(methods.size(),
                                                             std::vector<std::vector<Vector>>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    mmgt_codes[i] = encode_all(samples[i].query.past, member_futures(samples[i].mmgt));
    for (std::size_t m = 0; m < methods.size(); ++m) {
      method_codes[m][i] = encode_all(methods[m][i].past, methods[m][i].futures);
    }
  }

  std::vector<RankingRow> rows;
  for (const auto& point : grid) {
    RankingRow row;
    row.point = point;
    FittedPipeline p;
    p.config = base;
    p.config.layout.dims = point.layout_dims;
    p.config.cluster = point.cluster;
    p.config.layout.seed = derive_seed(base.seed, "layout");
    p.embedder.layout = fit_layout(train_codes, p.config.layout);
    p.modes = fit_modes(p.embedder.layout, point.cluster);
    row.mode_count = p.modes.mode_count();
    if (row.mode_count < 2) {
      row.degenerate = true;
      rows.push_back(row);
      continue;
    }
    p.tau = calibrate_tau_codes(p.embedder.layout, p.modes, cal_codes, base.tau_margin);
    auto assign = [&](const std::vector<Vector>& codes) {
      std::vector<int> ids;
      for (const auto& c : codes) ids.push_back(p.assign_point(p.embedder.layout.transform(c)).mode);
      return ids;
    };
    std::vector<std::vector<int>> mmgt_modes(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) mmgt_modes[i] = assign(mmgt_codes[i]);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      double total = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::vector<int> pred = assign(method_codes[m][i]);
        if (valid_modes(mmgt_modes[i]).empty()) continue;
        total += mmcm(coverage_rate(mmgt_modes[i], pred), validity_rate(mmgt_modes[i], pred));
      }
      row.mmcm.push_back(total / static_cast<double>(samples.size()));
    }
    row.order.resize(methods.size());
    std::iota(row.order.begin(), row.order.end(), 0);
    std::stable_sort(row.order.begin(), row.order.end(),
                     [&](int x, int y) { return row.mmcm[x] > row.mmcm[y]; });
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out.precision(10);
  out << "level,metric,value\n";
  for (const auto& l : r.levels) {
    out << l.level << ",MMCM," << l.mmcm << "\n";
    out << l.level << ",C," << l.coverage << "\n";
    out << l.level << ",V," << l.validity << "\n";
    if (l.apd) out << l.level << ",APD," << *l.apd << "\n";
    if (l.mmade) out << l.level << ",MMADE," << *l.mmade << "\n";
    if (l.mmfde) out << l.level << ",MMFDE," << *l.mmfde << "\n";
  }
  return out.str();
}

}  // namespace mmcm
