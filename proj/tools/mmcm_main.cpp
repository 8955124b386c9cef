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

// mmcm: corpus generation, pipeline fitting, evaluation and perturbation
// sweeps from the command line. Exit codes: 0 success, 1 usage or config
// error, 2 data error, 3 degenerate pipeline.

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <list>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmcm/binary_io.hpp"
#include "mmcm/config.hpp"
#include "mmcm/corpus_io.hpp"
#include "mmcm/error.hpp"
#include "mmcm/evaluation.hpp"
#include "mmcm/perturb.hpp"
#include "mmcm/pipeline.hpp"
#include "mmcm/report.hpp"
#include "mmcm/rng.hpp"
#include "mmcm/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mmcm;

namespace {

// Keys that change the fitted pipeline; eval compares fingerprints only when
// one of them is given explicitly.
const char* const kPipelineKeys[] = {
    "preset", "past_frames", "future_frames", "past_tail_frames", "window_stride",
    "encoder_epochs", "encoder_learning_rate", "encoder_batch_size", "encoder_widths",
    "layout_dims", "layout_neighbors", "layout_min_dist", "layout_spread", "layout_epochs",
    "layout_negative_rate", "layout_learning_rate", "transform_epochs", "min_cluster_size",
    "min_samples", "mmgt_threshold", "mmgt_past_window", "mmgt_include_self", "tau_margin",
    "calibration_stride", "seed"};

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::vector<std::string>> values;
};

RunConfig load_config(const Command& cmd) {
  RunConfig config = cmd.config_path.empty() ? RunConfig{} : RunConfig::from_file(cmd.config_path);
  for (const auto& [key, tokens] : cmd.values) {
    if (tokens.empty()) continue;
    std::string joined;
    for (const auto& t : tokens) joined += (joined.empty() ? "" : ",") + t;
    config.set(key, joined);
  }
  config.validate();
  if (const int threads = config.get_int("threads"); threads > 0) omp_set_num_threads(threads);
  return config;
}

std::string require_path(const RunConfig& config, const char* key) {
  std::string path = config.get_string(key);
  if (path.empty()) throw ConfigError("config key '" + std::string(key) + "' is required");
  return path;
}

fs::path output_dir(const RunConfig& config) {
  const fs::path dir = require_path(config, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
  return dir;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Checks the pipeline against the corpus and the run configuration.
void check_compatible(const FittedPipeline& pipeline, const MotionCorpus& corpus, const RunConfig& config) {
  if (!(pipeline.skeleton == corpus.skeleton)) {
    throw InvalidArgument("corpus skeleton (" + std::to_string(corpus.skeleton.keypoint_count()) +
                          " keypoints) does not match the pipeline skeleton (" +
                          std::to_string(pipeline.skeleton.keypoint_count()) + " keypoints)");
  }
  if (!(pipeline.tau > 0.0) || !std::isfinite(pipeline.tau)) {
    throw InvalidArgument("pipeline has no calibrated abnormality threshold");
  }
  bool explicit_pipeline = false;
  for (const char* key : kPipelineKeys) explicit_pipeline = explicit_pipeline || config.has(key);
  if (!explicit_pipeline || config.get_bool("allow_fingerprint_mismatch")) return;
  const std::uint64_t expected = config.pipeline_config().fingerprint();
  if (expected != pipeline.fingerprint) {
    throw ConfigError("pipeline fingerprint " + hex(pipeline.fingerprint) +
                      " does not match the configuration fingerprint " + hex(expected) +
                      " (set allow_fingerprint_mismatch to override)");
  }
}

// Rebuilds the test motions of a prediction file and mines their MMGTs.
std::vector<EvalSample> samples_from_predictions(const FittedPipeline& pipeline, const MotionCorpus& corpus,
                                                 const PredictionFile& file) {
  const int b = pipeline.config.past_frames, t = pipeline.config.future_frames;
  if (file.past_frames != b || file.future_frames != t) {
    throw InvalidArgument("prediction file has B=" + std::to_string(file.past_frames) + ", T=" +
                          std::to_string(file.future_frames) + "; the pipeline expects B=" +
                          std::to_string(b) + ", T=" + std::to_string(t));
  }
  if (!(file.skeleton == pipeline.skeleton)) {
    throw InvalidArgument("prediction skeleton does not match the pipeline skeleton");
  }
  MmgtConfig with_gt = pipeline.config.mmgt;
  MmgtConfig without_gt = with_gt;
  without_gt.include_self = false;
  const MmgtMiner miner(corpus, with_gt, t);
  const MmgtMiner blind(corpus, without_gt, t);
  std::vector<EvalSample> out(file.sets.size());
  const long n = static_cast<long>(file.sets.size());
  for (long i = 0; i < n; ++i) {
    const PredictionSet& p = file.sets[i];
    try {
      p.validate(t);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("prediction set " + std::to_string(i) + ": " + e.what());
    }
    MotionSequence& q = out[i].query;
    q.past = p.past;
    q.frame_rate = corpus.frame_rate;
    q.source_id = p.source_id;
    if (p.ground_truth) {
      q.future = *p.ground_truth;
      q.origin = p.origin;
    } else {
      q.future = p.futures.front();  // shape only; no self member is added
    }
  }
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    out[i].mmgt = file.sets[i].ground_truth ? miner.mine(out[i].query) : blind.mine(out[i].query);
  }
  return out;
}

int cmd_gen(const RunConfig& config) {
  const fs::path out = require_path(config, "out");
  const auto specs = config.family_specs();
  const MotionCorpus corpus =
      generate_synthetic(specs, config.synthetic_options(), derive_seed(config.get_u64("seed"), "corpus"));
  save_corpus(corpus, out);
  std::cout << "wrote " << out.string() << ": " << corpus.tracks.size() << " tracks, "
            << corpus.frame_count() << " frames at " << corpus.frame_rate << " Hz\n";
  std::map<int, std::pair<int, std::size_t>> per_label;
  for (const auto& t : corpus.tracks) {
    auto& [tracks, frames] = per_label[t.label];
    ++tracks;
    frames += t.frames.size();
  }
  for (const auto& [label, stats] : per_label) {
    std::cout << "  family " << family_name(specs[label].family) << ": " << stats.first << " tracks, "
              << stats.second << " frames\n";
  }
  return 0;
}

int cmd_fit(const RunConfig& config) {
  const MotionCorpus corpus = load_corpus(require_path(config, "corpus"));
  const fs::path out = require_path(config, "out");
  const PipelineConfig pc = config.pipeline_config();
  FitReport report;
  FittedPipeline pipeline;
  try {
    pipeline = fit_pipeline(corpus, pc, &report);
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::vector<ClusterConfig> candidates;
    for (int m : {5, 10, 15, 30, 50}) {
      for (int s : {1, 5}) candidates.push_back({m, s});
    }
    const auto rows = stability_report(corpus, pc, candidates);
    std::cerr << "stability of alternative cluster settings (best first):\n"
              << "  min_cluster_size,min_samples,modes,noise_rate,persistence,score\n";
    for (std::size_t i = 0; i < rows.size() && i < 5; ++i) {
      const auto& r = rows[i];
      std::cerr << "  " << r.config.min_cluster_size << "," << r.config.min_samples << "," << r.mode_count
                << "," << fixed(r.noise_rate) << "," << fixed(r.mean_persistence) << "," << fixed(r.score)
                << "\n";
    }
    return 3;
  }
  save_pipeline(pipeline, out);
  std::cout << "wrote " << out.string() << "\n"
            << "  windows " << report.window_count << ", encoder rmse " << fixed(report.encoder.final_rmse, 5)
            << "\n  modes " << report.mode_count << ", noise rate " << fixed(report.noise_rate)
            << "\n  tau " << fixed(report.tau, 5) << " (max calibration distance "
            << fixed(report.calibration_max, 5) << ")\n  fingerprint " << hex(pipeline.fingerprint) << "\n";
  return 0;
}

int cmd_predict(const RunConfig& config) {
  const FittedPipeline pipeline = load_pipeline(require_path(config, "pipeline"));
  const MotionCorpus corpus = load_corpus(require_path(config, "corpus"));
  const fs::path out = require_path(config, "out");
  check_compatible(pipeline, corpus, config);
  const auto samples = make_eval_samples(corpus, pipeline.config, config.get_int("eval_samples"),
                                         derive_seed(config.get_u64("seed"), "eval"));
  PredictionFile file;
  file.skeleton = pipeline.skeleton;
  file.frame_rate = corpus.frame_rate;
  file.past_frames = pipeline.config.past_frames;
  file.future_frames = pipeline.config.future_frames;
  const int top = config.get_int("surrogate_top_modes");
  const int count = config.get_int("predictions_per_sample");
  for (const auto& s : samples) file.sets.push_back(make_surrogate(pipeline, s, top, count));
  save_predictions(file, out);
  std::cout << "wrote " << out.string() << ": " << file.sets.size() << " samples x " << count
            << " predictions from " << (top == 0 ? std::string("all valid") : std::to_string(top))
            << " modes\n";
  return 0;
}

int cmd_eval(const RunConfig& config) {
  const FittedPipeline pipeline = load_pipeline(require_path(config, "pipeline"));
  const MotionCorpus corpus = load_corpus(require_path(config, "corpus"));
  const auto files = config.get_strings("predictions");
  if (files.empty()) throw ConfigError("config key 'predictions' is required");
  if (files.size() > 1) throw ConfigError("config key 'predictions': eval takes one file");
  const fs::path dir = output_dir(config);
  check_compatible(pipeline, corpus, config);
  const PredictionFile predictions = load_predictions(files.front());
  std::vector<MmgtSet> mmgts;
  for (auto& s : samples_from_predictions(pipeline, corpus, predictions)) mmgts.push_back(std::move(s.mmgt));
  const MetricReport report =
      score_dataset(pipeline, predictions.sets, mmgts, config.get_int("threads") != 1);
  write_file_atomic(dir / "report.json", report_json(report, pipeline));
  write_file_atomic(dir / "report.csv", report_csv(report));
  write_file_atomic(dir / "timing.json", timing_json(report));
  write_file_atomic(dir / "layout.svg", layout_svg(pipeline));
  write_mode_csv(pipeline.modes, pipeline.embedder.layout.layout, dir / "modes.csv");
  std::cout << "MMCM " << fixed(report.mmcm) << "  C " << fixed(report.coverage) << "  V "
            << fixed(report.validity);
  if (report.apd) std::cout << "  APD " << fixed(*report.apd);
  if (report.mmade) std::cout << "  MMADE " << fixed(*report.mmade);
  std::cout << "\n  " << report.samples.size() << " samples, " << report.degenerate_count
            << " without a valid mode, " << fixed(report.seconds_per_prediction * 1e3, 3)
            << " ms per prediction\n  reports in " << dir.string() << "\n";
  return 0;
}

void write_sweep(const fs::path& dir, const SweepResult& r, const std::string& right) {
  write_file_atomic(dir / ("sweep_" + r.name + ".csv"), sweep_csv(r));
  write_file_atomic(dir / ("sweep_" + r.name + ".svg"), sweep_svg(r, "MMCM", right));
  std::cout << r.name << " (" << r.level_name << "):\n";
  for (const auto& l : r.levels) {
    std::cout << "  " << l.level << "  MMCM " << fixed(l.mmcm);
    if (right == "APD" && l.apd) std::cout << "  APD " << fixed(*l.apd);
    if (right == "MMADE" && l.mmade) std::cout << "  MMADE " << fixed(*l.mmade);
    if (l.flagged > 0) std::cout << "  (" << l.flagged << " samples emptied)";
    std::cout << "\n";
  }
}

int cmd_perturb(const RunConfig& config) {
  const FittedPipeline pipeline = load_pipeline(require_path(config, "pipeline"));
  const MotionCorpus corpus = load_corpus(require_path(config, "corpus"));
  const fs::path dir = output_dir(config);
  check_compatible(pipeline, corpus, config);
  const std::uint64_t seed = config.get_u64("seed");
  const auto samples =
      make_eval_samples(corpus, pipeline.config, config.get_int("eval_samples"), derive_seed(seed, "eval"));
  const std::string kind = config.get_string("perturb_kind");
  auto wanted = [&](const char* k) { return kind == "all" || kind == k; };
  if (wanted("joint_noise")) {
    write_sweep(dir, run_noise_sweep(pipeline, samples, config.get_doubles("noise_grid"),
                                     derive_seed(seed, "joint_noise")),
                "APD");
  }
  if (wanted("bone_scale")) {
    write_sweep(dir, run_bone_sweep(pipeline, samples, config.get_doubles("bone_factors"),
                                    config.get_int("bones_per_future"), derive_seed(seed, "bone_scale")),
                "APD");
  }
  if (wanted("mismatch")) {
    write_sweep(dir, run_mismatch_sweep(pipeline, corpus, samples, config.get_doubles("mismatch_edges"),
                                        config.get_int("per_bucket"), derive_seed(seed, "mismatch")),
                "APD");
  }
  if (wanted("rare_mode_removal")) {
    const SweepResult r = run_rare_mode_removal(pipeline, samples, config.get_doubles("removal_grid"));
    write_sweep(dir, r, "MMADE");
    const SweepLevel ref = score_ground_truth_only(pipeline, samples);
    std::ostringstream rel;
    rel.precision(10);
    rel << "level,metric,value\n";
    const SweepLevel& best = r.levels.front();
    for (const auto& l : r.levels) {
      rel << l.level << ",MMCM," << relative_degradation(l.mmcm, best.mmcm, ref.mmcm) << "\n";
      if (l.mmade && best.mmade && ref.mmade) {
        rel << l.level << ",MMADE," << relative_degradation(*l.mmade, *best.mmade, *ref.mmade) << "\n";
      }
    }
    write_file_atomic(dir / "sweep_rare_mode_removal_relative.csv", rel.str());
  }
  if (wanted("noisy_addition")) {
    write_sweep(dir, run_noisy_addition(pipeline, samples, config.get_ints("addition_counts"),
                                        config.get_double("addition_sigma"), derive_seed(seed, "noisy_addition")),
                "MMADE");
  }
  return 0;
}

int cmd_sweep(const RunConfig& config) {
  const auto files = config.get_strings("predictions");
  if (files.size() < 2) throw ConfigError("config key 'predictions': sweep needs at least two prediction files");
  const auto grid = config.sweep_grid();
  if (grid.empty()) throw ConfigError("config key 'sweep_dims': the sweep grid is empty");
  const FittedPipeline pipeline = load_pipeline(require_path(config, "pipeline"));
  const MotionCorpus corpus = load_corpus(require_path(config, "corpus"));
  const fs::path dir = output_dir(config);
  check_compatible(pipeline, corpus, config);
  std::vector<PredictionFile> loaded;
  for (const auto& f : files) {
    if (!fs::exists(f)) throw InvalidArgument("prediction file " + f + " does not exist");
    loaded.push_back(load_predictions(f));
  }
  for (std::size_t m = 1; m < loaded.size(); ++m) {
    bool same = loaded[m].sets.size() == loaded[0].sets.size();
    for (std::size_t i = 0; same && i < loaded[0].sets.size(); ++i) {
      same = loaded[m].sets[i].past.size() == loaded[0].sets[i].past.size();
      for (std::size_t f = 0; same && f < loaded[0].sets[i].past.size(); ++f) {
        same = loaded[m].sets[i].past[f] == loaded[0].sets[i].past[f];
      }
    }
    if (!same) throw InvalidArgument("prediction file " + files[m] + " does not share the pasts of " + files[0]);
  }
  const auto samples = samples_from_predictions(pipeline, corpus, loaded[0]);
  std::vector<std::vector<PredictionSet>> methods;
  std::vector<std::string> names;
  for (std::size_t m = 0; m < loaded.size(); ++m) {
    methods.push_back(loaded[m].sets);
    names.push_back(fs::path(files[m]).stem().string());
  }
  const auto rows = run_hyperparameter_sweep(corpus, pipeline.config, pipeline.embedder.encoder, samples,
                                             methods, grid);
  write_file_atomic(dir / "ranking.csv", ranking_csv(rows, names));
  int kept = 0, changed = 0;
  std::vector<int> reference;
  for (const auto& r : rows) {
    std::cout << "  dims " << r.point.layout_dims << "  min_cluster_size " << r.point.cluster.min_cluster_size
              << "  min_samples " << r.point.cluster.min_samples << "  modes " << r.mode_count;
    if (r.degenerate) {
      std::cout << "  degenerate\n";
      continue;
    }
    for (std::size_t m = 0; m < r.mmcm.size(); ++m) std::cout << "  " << names[m] << " " << fixed(r.mmcm[m]);
    std::cout << "\n";
    if (reference.empty()) reference = r.order;
    (r.order == reference ? kept : changed) += 1;
  }
  std::cout << "ranking preserved at " << kept << " of " << kept + changed << " non-degenerate grid points\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MMCM multimodality metric for human motion prediction"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::list<Command> commands;
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Entry entries[] = {
      {"gen", "Generate a synthetic corpus (out = corpus file)", cmd_gen},
      {"fit", "Fit the pipeline on a corpus (out = pipeline file)", cmd_fit},
      {"predict", "Write surrogate predictions for sampled test motions (out = prediction file)", cmd_predict},
      {"eval", "Score a prediction file (out = report directory)", cmd_eval},
      {"perturb", "Run perturbation sweeps (out = report directory)", cmd_perturb},
      {"sweep", "Rank prediction files across a hyperparameter grid (out = report directory)", cmd_sweep},
  };
  std::map<CLI::App*, const Entry*> dispatch;
  for (const auto& e : entries) {
    Command& cmd = commands.emplace_back();
    cmd.app = app.add_subcommand(e.name, e.help);
    cmd.app->add_option("--config", cmd.config_path, "key=value configuration file")->check(CLI::ExistingFile);
    for (const auto& [key, fallback] : RunConfig::known_keys()) {
      auto* opt = cmd.app->add_option("--" + key, cmd.values[key], fallback.empty() ? "" : "default " + fallback);
      if (key == "predictions") {
        opt->expected(1, CLI::detail::expected_max_vector_size);
      } else {
        opt->expected(1);
      }
    }
    dispatch[cmd.app] = &e;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      const RunConfig config = load_config(cmd);
      return dispatch[cmd.app]->run(config);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    } catch (const DegenerateError& e) {
      std::cerr << "degenerate pipeline: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
