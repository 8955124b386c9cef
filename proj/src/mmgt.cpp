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

#include "mmcm/mmgt.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>

#include <json.hpp>

#include "mmcm/corpus_io.hpp"
#include "mmcm/error.hpp"

namespace mmcm {
namespace {

Vector window_vector(std::span<const Pose> frames, bool root_relative) {
  if (!root_relative) return flatten(frames);
  PoseSequence centered = root_center(frames);
  return flatten(centered);
}

bool same_frames(const PoseSequence& a, const PoseSequence& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

MmgtConfig MmgtConfig::for_preset(std::string_view preset) {
  MmgtConfig c;
  if (preset == "amass") {
    c.similarity_threshold = 0.4;
  } else if (preset == "synthetic") {
    c.similarity_threshold = 0.1;
  } else {
    c.similarity_threshold = 0.5;
  }
  return c;
}

void MmgtConfig::validate(int past_frames) const {
  if (past_window_frames < 1) throw InvalidArgument("MMGT past window must be at least one frame");
  if (past_window_frames > past_frames) {
    throw InvalidArgument("MMGT past window of " + std::to_string(past_window_frames) +
                          " frames exceeds B = " + std::to_string(past_frames));
  }
  if (!(similarity_threshold >= 0.0) || !std::isfinite(similarity_threshold)) {
    throw InvalidArgument("MMGT similarity threshold must be a finite non-negative distance");
  }
}

double window_distance(std::span<const Pose> a, std::span<const Pose> b, bool root_relative) {
  if (a.size() != b.size()) throw InvalidArgument("window lengths differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows()) throw InvalidArgument("pose keypoint counts differ");
    if (root_relative) {
      sq += (root_center(a[i]) - root_center(b[i])).squaredNorm();
    } else {
      sq += (a[i] - b[i]).squaredNorm();
    }
  }
  return std::sqrt(sq);
}

MmgtMiner::MmgtMiner(const MotionCorpus& corpus, const MmgtConfig& config, int future_frames)
    : corpus_(&corpus), config_(config), future_frames_(future_frames) {
  if (future_frames <= 0) throw InvalidArgument("future length T must be positive");
  corpus.validate();
  const int w = config.past_window_frames;
  if (w < 1) throw InvalidArgument("MMGT past window must be at least one frame");
  const int k = corpus.skeleton.keypoint_count();
  for (int ti = 0; ti < static_cast<int>(corpus.tracks.size()); ++ti) {
    const int n = static_cast<int>(corpus.tracks[ti].frames.size());
    for (int t = w; t + future_frames <= n; ++t) positions_.push_back({ti, t});
  }
  Matrix windows(static_cast<Eigen::Index>(positions_.size()), w * k * 3);
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    const auto& frames = corpus.tracks[positions_[i].track].frames;
    std::span<const Pose> win(frames.data() + positions_[i].frame - w, w);
    windows.row(static_cast<Eigen::Index>(i)) = window_vector(win, config.root_relative).transpose();
  }
  index_ = VpTree(std::move(windows));
}

MmgtSet MmgtMiner::mine(const MotionSequence& query) const {
  query.validate();
  config_.validate(static_cast<int>(query.past.size()));
  if (static_cast<int>(query.future.size()) != future_frames_) {
    throw InvalidArgument("query future has " + std::to_string(query.future.size()) +
                          " frames, miner expects T = " + std::to_string(future_frames_));
  }
  if (query.keypoint_count() != corpus_->skeleton.keypoint_count()) {
    throw InvalidArgument("query keypoint count does not match the corpus skeleton");
  }
  const int w = config_.past_window_frames;
  std::span<const Pose> qwin = tail(query.past, w);
  const Vector q = window_vector(qwin, config_.root_relative);
  const double r = config_.similarity_threshold;
  const auto candidates = index_.radius_search(q, r * (1.0 + 1e-9) + 1e-12);

  MmgtSet set;
  set.query_id = query.source_id;
  int self_index = -1;
  for (int c : candidates) {
    const SourcePosition pos = positions_[c];
    const auto& frames = corpus_->tracks[pos.track].frames;
    std::span<const Pose> win(frames.data() + pos.frame - w, w);
    const double d = window_distance(qwin, win, config_.root_relative);
    if (d > r) continue;
    MmgtMember m;
    m.source = pos;
    m.past_distance = d;
    m.future.assign(frames.begin() + pos.frame, frames.begin() + pos.frame + future_frames_);
    if (query.origin && pos == *query.origin && d == 0.0 && same_frames(m.future, query.future)) {
      self_index = static_cast<int>(set.members.size());
    }
    set.members.push_back(std::move(m));
  }
  if (config_.include_self) {
    if (self_index >= 0) {
      std::rotate(set.members.begin(), set.members.begin() + self_index,
                  set.members.begin() + self_index + 1);
    } else {
      MmgtMember self;
      self.past_distance = 0.0;
      self.future = query.future;
      set.members.insert(set.members.begin(), std::move(self));
    }
  } else if (self_index >= 0) {
    set.members.erase(set.members.begin() + self_index);
  }
  return set;
}

MmgtSet build_mmgt(const MotionSequence& query, const MotionCorpus& corpus,
                   const MmgtConfig& config) {
  config.validate(static_cast<int>(query.past.size()));
  MmgtMiner miner(corpus, config, static_cast<int>(query.future.size()));
  return miner.mine(query);
}

std::vector<MmgtSet> build_all_mmgt(std::span<const MotionSequence> test_set,
                                    const MotionCorpus& corpus, const MmgtConfig& config,
                                    MmgtSummary* summary) {
  std::vector<MmgtSet> out(test_set.size());
  if (test_set.empty()) {
    if (summary) *summary = MmgtSummary{};
    return out;
  }
  MmgtMiner miner(corpus, config, static_cast<int>(test_set.front().future.size()));
  std::vector<std::exception_ptr> errors(test_set.size());
  const long n = static_cast<long>(test_set.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = miner.mine(test_set[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw InvalidArgument("MMGT query " + std::to_string(i) + ": " + e.what());
    }
  }
  if (summary) *summary = summarize(out);
  return out;
}

MmgtSummary summarize(std::span<const MmgtSet> sets) {
  MmgtSummary s;
  double total = 0.0;
  for (const auto& set : sets) {
    ++s.k_histogram[set.size()];
    if (set.empty()) ++s.empty_sets;
    total += set.size();
  }
  s.mean_k = sets.empty() ? 0.0 : total / static_cast<double>(sets.size());
  return s;
}

// MMGT table: u32 future_frames, u32 set_count, then per set
//   str query_id, u32 member_count, member_count x (i32 track, i32 frame, f64 distance)
void save_mmgt_sets(std::span<const MmgtSet> sets, const Skeleton& skeleton, double frame_rate,
                    const std::filesystem::path& path) {
  using nlohmann::json;
  int future_frames = 0;
  for (const auto& s : sets) {
    for (const auto& m : s.members) {
      if (future_frames == 0) future_frames = static_cast<int>(m.future.size());
      if (static_cast<int>(m.future.size()) != future_frames) {
        throw InvalidArgument("MMGT members have differing future lengths");
      }
    }
  }
  ByteWriter w;
  write_container_header(w, {ContainerKind::kMmgt, skeleton, frame_rate});
  w.u32(static_cast<std::uint32_t>(future_frames));
  w.u32(static_cast<std::uint32_t>(sets.size()));
  std::vector<const PoseSequence*> blocks;
  json sidecar = {{"format", "mmcm-mmgt"}, {"version", 1}, {"sets", json::array()}};
  for (const auto& s : sets) {
    w.str(s.query_id);
    w.u32(static_cast<std::uint32_t>(s.members.size()));
    json members = json::array();
    for (std::size_t i = 0; i < s.members.size(); ++i) {
      const auto& m = s.members[i];
      w.i32(m.source.track);
      w.i32(m.source.frame);
      w.f64(m.past_distance);
      blocks.push_back(&m.future);
      members.push_back({{"member", i},
                         {"track", m.source.track},
                         {"frame", m.source.frame},
                         {"distance", m.past_distance}});
    }
    sidecar["sets"].push_back({{"query", s.query_id}, {"members", members}});
  }
  write_payload(w, blocks);
  write_file_atomic(path, w.bytes());
  auto side = path;
  side += ".json";
  write_file_atomic(side, sidecar.dump(2) + "\n");
}

std::vector<MmgtSet> load_mmgt_sets(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path));
  ContainerHeader h = read_container_header(r, ContainerKind::kMmgt);
  const int future_frames = static_cast<int>(r.u32());
  const std::uint32_t set_count = r.u32();
  std::vector<MmgtSet> sets(set_count);
  std::uint64_t member_total = 0;
  for (auto& s : sets) {
    s.query_id = r.str();
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / 16) r.fail(FormatError::Kind::kTruncated, "member table exceeds file size");
    s.members.resize(n);
    for (auto& m : s.members) {
      m.source.track = r.i32();
      m.source.frame = r.i32();
      m.past_distance = r.f64();
    }
    member_total += n;
  }
  const int k = h.skeleton.keypoint_count();
  PoseSequence frames =
      read_payload(r, member_total * static_cast<std::uint64_t>(future_frames) * k * 3, k);
  if (!r.at_end()) r.fail(FormatError::Kind::kContent, "unexpected trailing bytes after payload");
  auto it = frames.begin();
  for (auto& s : sets) {
    for (auto& m : s.members) {
      m.future.assign(std::make_move_iterator(it), std::make_move_iterator(it + future_frames));
      it += future_frames;
    }
  }
  return sets;
}

}  // namespace mmcm
