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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes within its time limit.

#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <utility>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmcm/clustering.hpp"
#include "mmcm/corpus_io.hpp"
#include "mmcm/encoder.hpp"
#include "mmcm/evaluation.hpp"
#include "mmcm/layout.hpp"
#include "mmcm/metrics.hpp"
#include "mmcm/mmgt.hpp"
#include "mmcm/perturb.hpp"
#include "mmcm/pipeline.hpp"
#include "mmcm/report.hpp"
#include "mmcm/rng.hpp"
#include "mmcm/synthetic.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace mmcm;
using namespace mmcm::testing;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string join(const std::vector<double>& v, int digits = 3) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + num(x, digits);
  return "[" + out + "]";
}

// ---- 1: coverage, validity and MMCM against counting oracles -------------

Verdict criterion_metric_oracles() {
  std::mt19937_64 rng(11);
  int mismatches = 0, identity_failures = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    std::uniform_int_distribution<int> k_dist(1, 20), i_dist(1, 50), mode(0, 9), pred_mode(0, 12);
    std::bernoulli_distribution abnormal(0.1);
    std::vector<int> m(k_dist(rng)), mh(i_dist(rng));
    for (int& x : m) x = abnormal(rng) ? kAbnormal : mode(rng);
    for (int& x : mh) x = abnormal(rng) ? kAbnormal : pred_mode(rng);

    std::set<int> valid;
    for (int x : m) {
      if (x != kAbnormal) valid.insert(x);
    }
    int hit = 0;
    for (int v : valid) hit += std::find(mh.begin(), mh.end(), v) != mh.end() ? 1 : 0;
    int in_valid = 0;
    for (int x : mh) in_valid += valid.count(x) ? 1 : 0;
    const double c_oracle = valid.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(valid.size());
    const double v_oracle = static_cast<double>(in_valid) / static_cast<double>(mh.size());
    const double mmcm_oracle =
        c_oracle + v_oracle > 0.0 ? 2.0 * c_oracle * v_oracle / (c_oracle + v_oracle) : 0.0;

    const double c = coverage_rate(m, mh), v = validity_rate(m, mh), s = mmcm::mmcm(c, v);
    if (c != c_oracle || v != v_oracle || s != mmcm_oracle) ++mismatches;
    if (s > std::sqrt(c * v) + 1e-15 || s > 0.5 * (c + v) + 1e-15) ++identity_failures;
  }
  const std::vector<int> m{1, 2, 3, 3};
  const std::vector<int> p1{2, 3, 9};
  const std::vector<int> p2{2, 3, 3, 9, kAbnormal};
  const bool hand = coverage_rate(m, p1) == 2.0 / 3.0 && validity_rate(m, p2) == 3.0 / 5.0;
  return {mismatches == 0 && identity_failures == 0 && hand,
          "1000 instances, " + std::to_string(mismatches) + " oracle mismatches, " +
              std::to_string(identity_failures) + " harmonic identity violations, hand cases " +
              (hand ? "C=2/3 V=3/5" : "wrong")};
}

// ---- 2: density clustering against planting, a naive reference and Kruskal

Verdict criterion_clustering_oracle() {
  std::mt19937_64 rng(22);
  int datasets = 0, ari_failures = 0, reference_failures = 0;
  for (int d = 0; d < 60; ++d) {
    std::uniform_int_distribution<int> blob_count(2, 5), mcs_pick(0, 2), ms_pick(0, 1), dims_pick(2, 3);
    const int mcs = std::vector<int>{5, 8, 10}[mcs_pick(rng)];
    const int ms = std::vector<int>{1, 3}[ms_pick(rng)];
    const int blobs = blob_count(rng);
    std::uniform_int_distribution<int> size(mcs, 2 * mcs - 1);
    std::vector<int> sizes(blobs);
    for (int& s : sizes) s = size(rng);
    const PlantedBlobs data = planted_blobs(sizes, dims_pick(rng), 1.0, 10.0, rng());
    const ClusterConfig cfg{mcs, ms};
    const auto mst = mutual_reachability_mst(data.points, core_distances(data.points, ms));
    const ModeTable table = condense_and_extract(mst, static_cast<int>(data.points.rows()), cfg);
    if (adjusted_rand_index(table.labels, data.labels) != 1.0) ++ari_failures;
    if (!same_partition(table.labels, naive_density_clustering(data.points, mcs, ms))) ++reference_failures;
    ++datasets;
  }
  double worst_mst = 0.0;
  int mst_cases = 0;
  for (int n : {20, 100, 250, 500}) {
    for (int ms : {1, 2, 5}) {
      Matrix pts(n, 3);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = u(rng);
      const auto cores = core_distances(pts, ms);
      double lib = 0.0;
      for (const auto& e : mutual_reachability_mst(pts, cores)) lib += e.weight;
      worst_mst = std::max(worst_mst, std::abs(lib - kruskal_mst_weight(pts, naive_core_distances(pts, ms))));
      ++mst_cases;
    }
  }
  return {ari_failures == 0 && reference_failures == 0 && worst_mst <= 1e-9,
          std::to_string(datasets) + " planted datasets, ARI<1 on " + std::to_string(ari_failures) +
              ", reference disagreements " + std::to_string(reference_failures) + "; " +
              std::to_string(mst_cases) + " MST cases, max |weight - Kruskal| " + num(worst_mst, 3)};
}

// ---- 3: encoder gradients, layout quality, curve fit, self-transform -----

double gradient_relative_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> in_dim(3, 8), hidden(2, 6), code(1, 3);
  const int input = in_dim(rng);
  const std::vector<int> widths{hidden(rng), code(rng)};
  EncoderModel model = EncoderModel::initialize(input, widths, rng());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& l : model.layers) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = 0.3 * normal(rng);
  }
  Matrix x(7, input);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  Gradients g;
  reconstruction_loss(model, x, &g);
  std::vector<double> analytic, numeric;
  const double h = 1e-6;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto probe = [&](double& param, double grad) {
      const double keep = param;
      param = keep + h;
      const double up = reconstruction_loss(model, x);
      param = keep - h;
      const double down = reconstruction_loss(model, x);
      param = keep;
      analytic.push_back(grad);
      numeric.push_back((up - down) / (2.0 * h));
    };
    Matrix& w = model.layers[l].weights;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) probe(w(i, j), g.weights[l](i, j));
    }
    Vector& b = model.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) probe(b[i], g.biases[l][i]);
  }
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    scale += analytic[i] * analytic[i] + numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12);
}

// Least-squares oracle for the layout curve: coarse-to-fine grid search.
CurveParams grid_search_curve(double spread, double min_dist) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 300; ++i) {
    const double x = 3.0 * spread * i / 299.0;
    xs.push_back(x);
    ys.push_back(x < min_dist ? 1.0 : std::exp(-(x - min_dist) / spread));
  }
  auto sse = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      s += r * r;
    }
    return s;
  };
  double ba = 1.0, bb = 1.0, lo_a = 0.05, hi_a = 5.0, lo_b = 0.2, hi_b = 2.0;
  for (int round = 0; round < 6; ++round) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 60; ++i) {
      for (int j = 0; j <= 60; ++j) {
        const double a = lo_a + (hi_a - lo_a) * i / 60.0, b = lo_b + (hi_b - lo_b) * j / 60.0;
        const double s = sse(a, b);
        if (s < best) {
          best = s;
          ba = a;
          bb = b;
        }
      }
    }
    const double wa = (hi_a - lo_a) / 10.0, wb = (hi_b - lo_b) / 10.0;
    lo_a = std::max(1e-3, ba - wa);
    hi_a = ba + wa;
    lo_b = std::max(1e-3, bb - wb);
    hi_b = bb + wb;
  }
  return {ba, bb};
}

Verdict criterion_embedding_checks() {
  double worst_grad = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) worst_grad = std::max(worst_grad, gradient_relative_error(100 + s));

  const std::vector<int> sizes{60, 60, 60, 60, 60};
  const PlantedBlobs blobs = planted_blobs(sizes, 12, 1.0, 6.0, 33);
  LayoutOptions opts;
  opts.seed = 33;
  const LayoutModel layout = fit_layout(blobs.points, opts);
  const double trust = trustworthiness(blobs.points, layout.layout, 15);

  const CurveParams fitted = fit_ab_curve(1.0, 0.1);
  const CurveParams oracle = grid_search_curve(1.0, 0.1);
  const double da = std::abs(fitted.a - oracle.a) / oracle.a;
  const double db = std::abs(fitted.b - oracle.b) / oracle.b;

  // Training codes nudged off their stored value so the full placement path
  // runs, then compared with their fitted positions.
  std::mt19937_64 rng(34);
  std::normal_distribution<double> normal(0.0, 1e-6);
  double worst_self = 0.0;
  for (Eigen::Index i = 0; i < blobs.points.rows(); ++i) {
    Vector code = blobs.points.row(i).transpose();
    for (Eigen::Index j = 0; j < code.size(); ++j) code[j] += normal(rng);
    worst_self = std::max(worst_self, (layout.transform(code) - layout.layout.row(i).transpose()).norm());
  }
  const double self_ratio = worst_self / layout.scale();
  double exact_self = 0.0;
  for (Eigen::Index i = 0; i < blobs.points.rows(); ++i) {
    exact_self = std::max(exact_self, (layout.transform(blobs.points.row(i).transpose()) -
                                       layout.layout.row(i).transpose()).norm());
  }

  const bool pass = worst_grad <= 1e-4 && trust >= 0.90 && da <= 0.05 && db <= 0.05 && self_ratio <= 0.10 &&
                    exact_self <= 0.10 * layout.scale();
  return {pass, "max gradient rel. error " + num(worst_grad, 3) + ", trustworthiness " + num(trust) +
                    ", (a,b)=(" + num(fitted.a) + "," + num(fitted.b) + ") vs oracle (" + num(oracle.a) + "," +
                    num(oracle.b) + "), max self-transform offset " + num(self_ratio, 3) + " of layout scale"};
}

// ---- 4: perturbation trends -----------------------------------------------

std::vector<double> levels_of(const SweepResult& r) {
  std::vector<double> v;
  for (const auto& l : r.levels) v.push_back(l.level);
  return v;
}

std::vector<double> metric_of(const SweepResult& r, const std::function<double(const SweepLevel&)>& f) {
  std::vector<double> v;
  for (const auto& l : r.levels) v.push_back(f(l));
  return v;
}

Verdict criterion_perturbation_trends() {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  const SweepResult noise = run_noise_sweep(p, samples, default_noise_grid(), derive_seed(0, "joint_noise"));
  const SweepResult bone =
      run_bone_sweep(p, samples, default_bone_factors(), 2, derive_seed(0, "bone_scale"));
  const SweepResult mismatch = run_mismatch_sweep(p, synthetic_corpus(), samples, default_mismatch_edges(), 10,
                                                  derive_seed(0, "mismatch"));
  auto mmcm_of = [](const SweepLevel& l) { return l.mmcm; };
  auto apd_of = [](const SweepLevel& l) { return l.apd.value_or(0.0); };
  bool pass = true;
  std::string detail;
  for (const SweepResult* r : {&noise, &bone, &mismatch}) {
    const auto x = levels_of(*r);
    const auto m = metric_of(*r, mmcm_of);
    const auto a = metric_of(*r, apd_of);
    const double rho_m = spearman(x, m), rho_a = spearman(x, a);
    pass = pass && rho_m <= -0.9 && rho_a >= 0.9;
    detail += (detail.empty() ? "" : "; ") + r->name + ": rho(MMCM) " + num(rho_m, 3) + " " + join(m) +
              ", rho(APD) " + num(rho_a, 3) + " " + join(a);
  }
  return {pass, detail};
}

// ---- 5: rare-mode removal -------------------------------------------------

Verdict criterion_rare_mode_removal() {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  const SweepResult r = run_rare_mode_removal(p, samples, default_removal_grid());
  const SweepLevel ref = score_ground_truth_only(p, samples);
  const SweepLevel& best = r.levels.front();
  bool pass = best.level == 0.0 && best.mmade && best.mmfde && ref.mmade;
  std::vector<double> rel_mmcm, rel_mmade;
  for (const auto& l : r.levels) {
    pass = pass && l.mmcm <= best.mmcm && *l.mmade >= *best.mmade && *l.mmfde >= *best.mmfde &&
           l.coverage <= best.coverage;
    rel_mmcm.push_back(relative_degradation(l.mmcm, best.mmcm, ref.mmcm));
    rel_mmade.push_back(relative_degradation(*l.mmade, *best.mmade, *ref.mmade));
    if (l.level > 0.0) pass = pass && rel_mmcm.back() >= rel_mmade.back();
  }
  return {pass, "relative MMCM " + join(rel_mmcm) + " vs relative MMADE " + join(rel_mmade) + " over v=" +
                    join(levels_of(r), 3)};
}

// ---- 6: noisy additions -----------------------------------------------------

Verdict criterion_noisy_addition() {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  const SweepResult r =
      run_noisy_addition(p, samples, default_addition_counts(), 0.5, derive_seed(0, "noisy_addition"));
  bool monotone = true;
  for (std::size_t i = 1; i < r.levels.size(); ++i) {
    monotone = monotone && *r.levels[i].mmade <= *r.levels[i - 1].mmade &&
               *r.levels[i].mmfde <= *r.levels[i - 1].mmfde;
  }
  const bool drop = r.levels.back().mmcm < r.levels.front().mmcm;
  auto mm = metric_of(r, [](const SweepLevel& l) { return l.mmcm; });
  auto ade = metric_of(r, [](const SweepLevel& l) { return *l.mmade; });
  auto fde = metric_of(r, [](const SweepLevel& l) { return *l.mmfde; });
  return {monotone && drop, "MMCM " + join(mm) + ", MMADE " + join(ade, 5) + ", MMFDE " + join(fde, 5) +
                                " over counts " + join(levels_of(r), 3)};
}

// ---- 7: scoring cost --------------------------------------------------------

Verdict criterion_scoring_cost() {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  const int previous = omp_get_max_threads();
  omp_set_num_threads(1);
  double seconds = 0.0;
  int predictions = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const PredictionSet set = make_surrogate(p, samples[i], 0, 50);
    const auto start = Clock::now();
    const SampleScore s = score_sample(p, set, samples[i].mmgt);
    seconds += std::chrono::duration<double>(Clock::now() - start).count();
    predictions += s.prediction_count;
  }
  omp_set_num_threads(previous);
  const double per = seconds / predictions;
  return {per <= 0.1, num(per * 1e3, 3) + " ms per prediction over " + std::to_string(predictions) +
                          " predictions (MMGT embedding included), single thread"};
}

// ---- 8: ranking robustness --------------------------------------------------

Verdict criterion_ranking_robustness() {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  std::vector<std::vector<PredictionSet>> methods(2);
  for (const auto& s : samples) {
    methods[0].push_back(make_surrogate(p, s, 0, 50));
    methods[1].push_back(make_surrogate(p, s, 1, 50));
  }
  const auto grid = default_sweep_grid();
  const auto rows = run_hyperparameter_sweep(synthetic_corpus(), p.config, p.embedder.encoder, samples, methods, grid);
  int kept = 0, flipped = 0, degenerate = 0;
  std::string worst;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.degenerate) {
      ++degenerate;
      continue;
    }
    (r.mmcm[0] > r.mmcm[1] ? kept : flipped) += 1;
    min_gap = std::min(min_gap, r.mmcm[0] - r.mmcm[1]);
  }
  return {flipped == 0 && kept > 0,
          std::to_string(kept) + " of " + std::to_string(kept + flipped) + " non-degenerate grid points keep " +
              "all-modes > single-mode (" + std::to_string(degenerate) + " degenerate), smallest MMCM gap " +
              num(min_gap, 3)};
}

// ---- 9: determinism and persistence ----------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MMCM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Verdict criterion_determinism() {
  const FittedPipeline& p = synthetic_pipeline();
  const auto& samples = synthetic_samples();
  const fs::path dir = fs::temp_directory_path() / ("mmcm_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::vector<PredictionSet> sets;
  std::vector<MmgtSet> mmgts;
  for (std::size_t i = 0; i < 30; ++i) {
    sets.push_back(make_surrogate(p, samples[i], 2, 50));
    mmgts.push_back(samples[i].mmgt);
  }
  const std::string in_process = report_json(score_dataset(p, sets, mmgts), p);
  save_pipeline(p, dir / "pipeline.mmcmp");
  const FittedPipeline reloaded = load_pipeline(dir / "pipeline.mmcmp");
  const std::string after_reload = report_json(score_dataset(reloaded, sets, mmgts), reloaded);
  const bool reload_same = in_process == after_reload;

  bool cli_ok = true;
  std::vector<std::string> digests;
  for (int run = 0; run < 2; ++run) {
    const fs::path r = dir / ("run" + std::to_string(run));
    fs::create_directories(r);
    const std::string c = (r / "corpus.mmcm").string(), pl = (r / "pipeline.mmcmp").string(),
                      pr = (r / "pred.mmcm").string();
    cli_ok = cli_ok && run_cli("gen --seed 7 --out " + c) == 0;
    cli_ok = cli_ok && run_cli("fit --seed 7 --corpus " + c + " --out " + pl) == 0;
    cli_ok = cli_ok && run_cli("predict --seed 7 --eval_samples 20 --pipeline " + pl + " --corpus " + c +
                               " --out " + pr) == 0;
    cli_ok = cli_ok && run_cli("eval --seed 7 --pipeline " + pl + " --corpus " + c + " --predictions " + pr +
                               " --out " + (r / "eval").string()) == 0;
    cli_ok = cli_ok && run_cli("perturb --seed 7 --eval_samples 20 --perturb_kind joint_noise --pipeline " + pl +
                               " --corpus " + c + " --out " + (r / "perturb").string()) == 0;
    std::string all;
    for (const fs::path f : {r / "corpus.mmcm", r / "pipeline.mmcmp", r / "pred.mmcm", r / "eval" / "report.json",
                             r / "eval" / "report.csv", r / "eval" / "layout.svg",
                             r / "perturb" / "sweep_joint_noise.csv", r / "perturb" / "sweep_joint_noise.svg"}) {
      const std::string bytes = slurp(f);
      cli_ok = cli_ok && !bytes.empty();
      all += bytes;
    }
    digests.push_back(all);
  }
  const bool cli_same = cli_ok && digests[0] == digests[1];
  fs::remove_all(dir);
  return {reload_same && cli_same, std::string("reloaded report ") + (reload_same ? "byte-identical" : "differs") +
                                       "; CLI gen/fit/predict/eval/perturb reruns " +
                                       (cli_ok ? (cli_same ? "byte-identical" : "differ") : "failed")};
}

// ---- 10: MMGT against the exhaustive scan ---------------------------------

Verdict criterion_mmgt_oracle() {
  // Two corpora under 10^4 frames: a subset of the synthetic corpus (dense
  // matches) and random walks (sparse matches).
  MotionCorpus synth = synthetic_corpus();
  synth.tracks.resize(80);  // 9,600 frames
  const MotionCorpus walks = random_corpus(12, 400, Skeleton::h36m(), 44);
  int queries = 0, mismatches = 0, monotone_failures = 0;
  long members = 0;
  std::mt19937_64 rng(45);
  for (const MotionCorpus* corpus : {&std::as_const(synth), &walks}) {
    for (double threshold : {0.5, 0.4}) {
      for (int window : {1, 3}) {
        MmgtConfig cfg;
        cfg.similarity_threshold = threshold;
        cfg.past_window_frames = window;
        for (int q = 0; q < 12; ++q) {
          std::uniform_int_distribution<int> track(0, static_cast<int>(corpus->tracks.size()) - 1);
          const int t = track(rng);
          std::uniform_int_distribution<int> frame(10, static_cast<int>(corpus->tracks[t].frames.size()) - 20);
          MotionSequence query = corpus->sequence_at(t, frame(rng), 10, 20);
          if (q % 3 == 2) {
            // Off-corpus query: jitter the past and forget the origin.
            std::normal_distribution<double> jitter(0.0, 0.01);
            for (auto& pose : query.past) {
              for (Eigen::Index i = 0; i < pose.size(); ++i) pose.data()[i] += jitter(rng);
            }
            query.origin.reset();
          }
          for (bool self : {true, false}) {
            cfg.include_self = self;
            const MmgtSet set = build_mmgt(query, *corpus, cfg);
            std::vector<std::pair<int, int>> got;
            for (const auto& m : set.members) {
              if (m.source.track >= 0) got.emplace_back(m.source.track, m.source.frame);
            }
            std::sort(got.begin(), got.end());
            std::vector<std::pair<int, int>> want;
            for (const auto& pos : exhaustive_mmgt_positions(query, *corpus, cfg, 20)) {
              want.emplace_back(pos.track, pos.frame);
            }
            const bool self_ok = !self || (!set.members.empty() && set.members.front().future.size() == 20 &&
                                           set.members.front().past_distance == 0.0);
            if (got != want || !self_ok) ++mismatches;
            members += static_cast<long>(want.size());
            ++queries;
          }
          cfg.include_self = true;
          std::set<std::pair<int, int>> previous;
          for (double scale : {0.25, 0.5, 0.8, 1.0, 1.5}) {
            MmgtConfig grown = cfg;
            grown.similarity_threshold = threshold * scale;
            std::set<std::pair<int, int>> now;
            for (const auto& m : build_mmgt(query, *corpus, grown).members) now.emplace(m.source.track, m.source.frame);
            if (!std::includes(now.begin(), now.end(), previous.begin(), previous.end())) ++monotone_failures;
            previous = std::move(now);
          }
        }
      }
    }
  }
  return {mismatches == 0 && monotone_failures == 0,
          std::to_string(queries) + " queries (" + std::to_string(members) + " oracle members), " +
              std::to_string(mismatches) + " mismatches, " + std::to_string(monotone_failures) +
              " threshold-monotonicity violations"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {1, "C/V/MMCM oracle equivalence", 1.0, criterion_metric_oracles},
      {2, "clustering oracle", 30.0, criterion_clustering_oracle},
      {3, "embedding checks", 120.0, criterion_embedding_checks},
      {4, "noise, bone and mismatch trends", 300.0, criterion_perturbation_trends},
      {5, "rare-mode removal trend", 300.0, criterion_rare_mode_removal},
      {6, "noisy addition trend and monotonicity", 300.0, criterion_noisy_addition},
      {7, "scoring cost per prediction", 0.0, criterion_scoring_cost},
      {8, "ranking robustness over the hyperparameter grid", 900.0, criterion_ranking_robustness},
      {9, "determinism and persistence", 0.0, criterion_determinism},
      {10, "MMGT exhaustive oracle", 0.0, criterion_mmgt_oracle},
  };

  // The shared fitted pipeline is built once; its cost is charged to the
  // first criterion that uses it.
  double fixture_seconds = 0.0;
  {
    const auto start = Clock::now();
    synthetic_samples();
    fixture_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  }

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.id == 4) seconds += fixture_seconds;
    const bool in_time = c.limit_seconds <= 0.0 || seconds < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                seconds,
                c.limit_seconds > 0.0 ? (in_time ? (" < " + num(c.limit_seconds, 4) + " s").c_str()
                                                 : (" exceeds " + num(c.limit_seconds, 4) + " s").c_str())
                                      : "");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
