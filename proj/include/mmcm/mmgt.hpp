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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmcm/motion.hpp"
#include "mmcm/window_index.hpp"

namespace mmcm {

struct MmgtConfig {
  int past_window_frames = 1;
  double similarity_threshold = 0.5;  // meters, l2 over the flattened window
  bool include_self = true;
  bool root_relative = true;

  // h36m: threshold 0.5; amass: 0.4; synthetic: 0.1.
  static MmgtConfig for_preset(std::string_view preset);
  void validate(int past_frames) const;
};

struct MmgtMember {
  // Corpus position of the member's first future frame; {-1, -1} for the
  // query's own future when it was not mined from the corpus.
  SourcePosition source;
  double past_distance = 0.0;
  PoseSequence future;
};

struct MmgtSet {
  std::string query_id;
  std::vector<MmgtMember> members;  // self member first, then by (track, frame)

  int size() const { return static_cast<int>(members.size()); }
  bool empty() const { return members.empty(); }
};

struct MmgtSummary {
  std::map<int, int> k_histogram;  // K -> number of queries
  int empty_sets = 0;
  double mean_k = 0.0;
};

// Mines one corpus for many queries. Trailing windows of every eligible
// position are indexed once; queries are answered by radius search followed by
// a re-verification of each candidate's distance.
class MmgtMiner {
 public:
  MmgtMiner(const MotionCorpus& corpus, const MmgtConfig& config, int future_frames);

  MmgtSet mine(const MotionSequence& query) const;

  const MmgtConfig& config() const { return config_; }
  int future_frames() const { return future_frames_; }

 private:
  const MotionCorpus* corpus_;
  MmgtConfig config_;
  int future_frames_;
  std::vector<SourcePosition> positions_;
  VpTree index_;
};

// l2 distance between two windows of equal length, root-centering each frame
// when `root_relative` is set.
double window_distance(std::span<const Pose> a, std::span<const Pose> b, bool root_relative);

MmgtSet build_mmgt(const MotionSequence& query, const MotionCorpus& corpus,
                   const MmgtConfig& config);

// Queries run concurrently; results keep test-set order. Errors are rethrown
// with the failing query index.
std::vector<MmgtSet> build_all_mmgt(std::span<const MotionSequence> test_set,
                                    const MotionCorpus& corpus, const MmgtConfig& config,
                                    MmgtSummary* summary = nullptr);

MmgtSummary summarize(std::span<const MmgtSet> sets);

// Member futures go into a kind-2 container; `<path>.json` receives the
// (query, member, track, frame, distance) triples.
void save_mmgt_sets(std::span<const MmgtSet> sets, const Skeleton& skeleton, double frame_rate,
                    const std::filesystem::path& path);
std::vector<MmgtSet> load_mmgt_sets(const std::filesystem::path& path);

}  // namespace mmcm
