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

#include "mmcm/corpus_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

constexpr char kMagic[] = "MMCM";

std::uint64_t floats_in(const PoseSequence& frames) {
  std::uint64_t n = 0;
  for (const Pose& p : frames) n += static_cast<std::uint64_t>(p.rows()) * 3;
  return n;
}

void expect_end(const ByteReader& r) {
  if (!r.at_end()) {
    r.fail(FormatError::Kind::kContent,
           std::to_string(r.remaining()) + " unexpected trailing bytes after payload");
  }
}

}  // namespace

void write_container_header(ByteWriter& w, const ContainerHeader& header) {
  w.raw(std::string_view(kMagic, 4));
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(header.kind));
  w.u8(0);
  w.u8(0);
  const Skeleton& s = header.skeleton;
  w.u32(static_cast<std::uint32_t>(s.keypoint_count()));
  w.str(s.preset());
  w.u32(static_cast<std::uint32_t>(s.bones().size()));
  for (const Bone& b : s.bones()) {
    w.u32(static_cast<std::uint32_t>(b.parent));
    w.u32(static_cast<std::uint32_t>(b.child));
  }
  w.f64(header.frame_rate);
}

ContainerHeader read_container_header(ByteReader& r, ContainerKind expected) {
  if (r.remaining() < 4 || r.raw(4) != std::string_view(kMagic, 4)) {
    throw FormatError(FormatError::Kind::kMagic, 0, "not an MMCM container (bad magic)");
  }
  const std::uint8_t version = r.u8();
  if (version != kContainerVersion) {
    throw FormatError(FormatError::Kind::kVersion, 4,
                      "unsupported container version " + std::to_string(version) +
                          " (expected " + std::to_string(kContainerVersion) + ")");
  }
  const std::uint8_t kind = r.u8();
  if (kind != static_cast<std::uint8_t>(expected)) {
    throw FormatError(FormatError::Kind::kContent, 5,
                      "container kind " + std::to_string(kind) + " where " +
                          std::to_string(static_cast<int>(expected)) + " was expected");
  }
  r.u8();
  r.u8();
  const std::uint64_t skeleton_offset = r.offset();
  const std::uint32_t keypoints = r.u32();
  const std::string preset = r.str();
  const std::uint32_t bone_count = r.u32();
  if (bone_count > r.remaining() / 8) {
    r.fail(FormatError::Kind::kTruncated, "bone table exceeds file size");
  }
  std::vector<Bone> bones(bone_count);
  for (auto& b : bones) {
    b.parent = static_cast<int>(r.u32());
    b.child = static_cast<int>(r.u32());
  }
  ContainerHeader h;
  h.kind = expected;
  try {
    h.skeleton = Skeleton(static_cast<int>(keypoints), bones, {}, preset);
    if (!preset.empty()) {
      Skeleton named = Skeleton::from_preset(preset);
      if (!(named == h.skeleton)) throw InvalidArgument("bones do not match preset '" + preset + "'");
      h.skeleton = std::move(named);
    }
  } catch (const InvalidArgument& e) {
    throw FormatError(FormatError::Kind::kSkeleton, skeleton_offset,
                      std::string("inconsistent skeleton: ") + e.what());
  }
  h.frame_rate = r.f64();
  if (!(h.frame_rate > 0.0)) {
    throw FormatError(FormatError::Kind::kContent, r.offset() - 8, "frame rate must be positive");
  }
  return h;
}

void write_payload(ByteWriter& w, const std::vector<const PoseSequence*>& blocks) {
  std::uint64_t count = 0;
  for (const auto* b : blocks) count += floats_in(*b);
  w.u64(count);
  for (const auto* b : blocks) {
    for (const Pose& p : *b) {
      for (Eigen::Index i = 0; i < p.size(); ++i) w.f32(static_cast<float>(p.data()[i]));
    }
  }
}

PoseSequence read_payload(ByteReader& r, std::uint64_t expected_floats, int keypoint_count) {
  const std::uint64_t declared = r.u64();
  if (declared != expected_floats) {
    r.fail(FormatError::Kind::kContent,
           "payload declares " + std::to_string(declared) + " floats but the table implies " +
               std::to_string(expected_floats));
  }
  if (r.remaining() < declared * 4) {
    r.fail(FormatError::Kind::kTruncated,
           "payload truncated: expected " + std::to_string(declared) + " floats, found " +
               std::to_string(r.remaining() / 4));
  }
  const std::uint64_t per_frame = static_cast<std::uint64_t>(keypoint_count) * 3;
  PoseSequence frames;
  frames.reserve(declared / per_frame);
  for (std::uint64_t f = 0; f < declared / per_frame; ++f) {
    Pose p(keypoint_count, 3);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = static_cast<double>(r.f32());
    frames.push_back(std::move(p));
  }
  return frames;
}

void quantize_to_storage(PoseSequence& frames) {
  for (Pose& p : frames) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p.data()[i] = static_cast<double>(static_cast<float>(p.data()[i]));
    }
  }
}

// Corpus table: u32 track_count, then per track
//   str source_id, i32 label, u64 frame_offset, u64 frame_count
void save_corpus(const MotionCorpus& corpus, const std::filesystem::path& path) {
  corpus.validate();
  ByteWriter w;
  write_container_header(w, {ContainerKind::kCorpus, corpus.skeleton, corpus.frame_rate});
  w.u32(static_cast<std::uint32_t>(corpus.tracks.size()));
  std::uint64_t offset = 0;
  std::vector<const PoseSequence*> blocks;
  for (const Track& t : corpus.tracks) {
    w.str(t.source_id);
    w.i32(t.label);
    w.u64(offset);
    w.u64(t.frames.size());
    offset += t.frames.size();
    blocks.push_back(&t.frames);
  }
  write_payload(w, blocks);
  write_file_atomic(path, w.bytes());
}

MotionCorpus load_corpus(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  if (!bytes.empty() && bytes.front() == '{') return load_corpus_jsonl(path);
  ByteReader r(std::move(bytes));
  ContainerHeader h = read_container_header(r, ContainerKind::kCorpus);
  MotionCorpus corpus{h.skeleton, h.frame_rate, {}};
  const std::uint32_t track_count = r.u32();
  if (track_count == 0) r.fail(FormatError::Kind::kContent, "corpus has no tracks");
  std::vector<std::uint64_t> counts;
  std::uint64_t expected_offset = 0;
  for (std::uint32_t i = 0; i < track_count; ++i) {
    Track t;
    t.source_id = r.str();
    t.label = r.i32();
    const std::uint64_t entry = r.offset();
    const std::uint64_t offset = r.u64();
    const std::uint64_t count = r.u64();
    if (offset != expected_offset) {
      throw FormatError(FormatError::Kind::kContent, entry,
                        "track '" + t.source_id + "' frame offset " + std::to_string(offset) +
                            " is not contiguous (expected " + std::to_string(expected_offset) + ")");
    }
    if (count == 0) {
      throw FormatError(FormatError::Kind::kContent, entry, "track '" + t.source_id + "' is empty");
    }
    expected_offset += count;
    counts.push_back(count);
    corpus.tracks.push_back(std::move(t));
  }
  const int k = h.skeleton.keypoint_count();
  PoseSequence frames = read_payload(r, expected_offset * k * 3, k);
  expect_end(r);
  auto it = frames.begin();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    auto next = it + static_cast<std::ptrdiff_t>(counts[i]);
    corpus.tracks[i].frames.assign(std::make_move_iterator(it), std::make_move_iterator(next));
    it = next;
  }
  return corpus;
}

void save_corpus_jsonl(const MotionCorpus& corpus, const std::filesystem::path& path) {
  corpus.validate();
  using nlohmann::json;
  std::ostringstream out;
  json header = {{"format", "mmcm-corpus"}, {"version", 1}, {"frame_rate", corpus.frame_rate}};
  if (corpus.skeleton.preset().empty()) {
    json bones = json::array();
    for (const Bone& b : corpus.skeleton.bones()) bones.push_back({b.parent, b.child});
    header["skeleton"] = {{"keypoints", corpus.skeleton.keypoint_count()}, {"bones", bones}};
  } else {
    header["skeleton"] = corpus.skeleton.preset();
  }
  out << header.dump() << '\n';
  for (const Track& t : corpus.tracks) {
    for (const Pose& p : t.frames) {
      json pose = json::array();
      for (Eigen::Index j = 0; j < p.rows(); ++j) pose.push_back({p(j, 0), p(j, 1), p(j, 2)});
      out << json{{"track", t.source_id}, {"label", t.label}, {"pose", pose}}.dump() << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

MotionCorpus load_corpus_jsonl(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::kIo, 0, "cannot open " + path.string());
  std::string line;
  std::uint64_t offset = 0;
  auto parse = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw FormatError(FormatError::Kind::kContent, offset, std::string("bad JSON line: ") + e.what());
    }
  };
  if (!std::getline(in, line)) throw FormatError(FormatError::Kind::kTruncated, 0, "empty fixture file");
  json header = parse(line);
  if (header.value("format", "") != "mmcm-corpus") {
    throw FormatError(FormatError::Kind::kMagic, 0, "JSON fixture header lacks format mmcm-corpus");
  }
  if (header.value("version", 0) != 1) {
    throw FormatError(FormatError::Kind::kVersion, 0, "unsupported fixture version");
  }
  MotionCorpus corpus;
  try {
    const json& s = header.at("skeleton");
    if (s.is_string()) {
      corpus.skeleton = Skeleton::from_preset(s.get<std::string>());
    } else {
      std::vector<Bone> bones;
      for (const auto& b : s.at("bones")) bones.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
      corpus.skeleton = Skeleton(s.at("keypoints").get<int>(), bones);
    }
    corpus.frame_rate = header.at("frame_rate").get<double>();
  } catch (const std::exception& e) {
    throw FormatError(FormatError::Kind::kSkeleton, 0, std::string("bad fixture header: ") + e.what());
  }
  offset += line.size() + 1;
  const int k = corpus.skeleton.keypoint_count();
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    json row = parse(line);
    try {
      const std::string id = row.at("track").get<std::string>();
      if (corpus.tracks.empty() || corpus.tracks.back().source_id != id) {
        for (const Track& t : corpus.tracks) {
          if (t.source_id == id) throw InvalidArgument("frames of track '" + id + "' are not contiguous");
        }
        corpus.tracks.push_back({id, row.value("label", -1), {}});
      }
      const json& pose = row.at("pose");
      if (static_cast<int>(pose.size()) != k) throw InvalidArgument("pose keypoint count mismatch");
      Pose p(k, 3);
      for (int j = 0; j < k; ++j) {
        for (int a = 0; a < 3; ++a) p(j, a) = pose.at(j).at(a).get<double>();
      }
      corpus.tracks.back().frames.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw FormatError(FormatError::Kind::kContent, offset, std::string("bad fixture frame: ") + e.what());
    }
    offset += line.size() + 1;
  }
  if (corpus.tracks.empty()) throw FormatError(FormatError::Kind::kContent, offset, "fixture has no frames");
  return corpus;
}

// Predictions table: u32 past_frames, u32 future_frames, u32 set_count, then
// per set
//   str source_id, i32 origin_track, i32 origin_frame, u8 has_ground_truth,
//   u32 future_count
// Payload per set: past, ground truth (if present), then each future.
void save_predictions(const PredictionFile& file, const std::filesystem::path& path) {
  ByteWriter w;
  write_container_header(w, {ContainerKind::kPredictions, file.skeleton, file.frame_rate});
  w.u32(static_cast<std::uint32_t>(file.past_frames));
  w.u32(static_cast<std::uint32_t>(file.future_frames));
  w.u32(static_cast<std::uint32_t>(file.sets.size()));
  std::vector<const PoseSequence*> blocks;
  for (const PredictionSet& s : file.sets) {
    s.validate(file.future_frames);
    if (static_cast<int>(s.past.size()) != file.past_frames) {
      throw InvalidArgument("prediction set past length differs from B");
    }
    if (s.past.front().rows() != file.skeleton.keypoint_count()) {
      throw InvalidArgument("prediction set does not match the skeleton");
    }
    w.str(s.source_id);
    w.i32(s.origin ? s.origin->track : -1);
    w.i32(s.origin ? s.origin->frame : -1);
    w.u8(s.ground_truth ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(s.futures.size()));
    blocks.push_back(&s.past);
    if (s.ground_truth) blocks.push_back(&*s.ground_truth);
    for (const auto& f : s.futures) blocks.push_back(&f);
  }
  write_payload(w, blocks);
  write_file_atomic(path, w.bytes());
}

PredictionFile load_predictions(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path));
  ContainerHeader h = read_container_header(r, ContainerKind::kPredictions);
  PredictionFile file{h.skeleton, h.frame_rate, 0, 0, {}};
  file.past_frames = static_cast<int>(r.u32());
  file.future_frames = static_cast<int>(r.u32());
  if (file.past_frames <= 0 || file.future_frames <= 0) {
    r.fail(FormatError::Kind::kContent, "B and T must be positive");
  }
  const std::uint32_t set_count = r.u32();
  struct Entry {
    bool has_gt;
    std::uint32_t futures;
  };
  std::vector<Entry> entries;
  std::uint64_t frames = 0;
  for (std::uint32_t i = 0; i < set_count; ++i) {
    PredictionSet s;
    s.source_id = r.str();
    const int track = r.i32();
    const int frame = r.i32();
    if (track >= 0) s.origin = SourcePosition{track, frame};
    const bool has_gt = r.u8() != 0;
    const std::uint64_t at = r.offset();
    const std::uint32_t futures = r.u32();
    if (futures == 0) {
      throw FormatError(FormatError::Kind::kContent, at,
                        "prediction set '" + s.source_id + "' has I = 0 futures");
    }
    entries.push_back({has_gt, futures});
    frames += file.past_frames + (has_gt ? file.future_frames : 0) +
              static_cast<std::uint64_t>(futures) * file.future_frames;
    file.sets.push_back(std::move(s));
  }
  const int k = h.skeleton.keypoint_count();
  PoseSequence payload = read_payload(r, frames * k * 3, k);
  expect_end(r);
  auto it = payload.begin();
  auto take = [&](int n) {
    PoseSequence out(std::make_move_iterator(it), std::make_move_iterator(it + n));
    it += n;
    return out;
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    PredictionSet& s = file.sets[i];
    s.past = take(file.past_frames);
    if (entries[i].has_gt) s.ground_truth = take(file.future_frames);
    for (std::uint32_t f = 0; f < entries[i].futures; ++f) s.futures.push_back(take(file.future_frames));
  }
  return file;
}

}  // namespace mmcm
