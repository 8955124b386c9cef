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

#include "mmcm/evaluation.hpp"

#include <chrono>
#include <exception>

#include "mmcm/error.hpp"

namespace mmcm {

std::vector<int> mode_ids(std::span<const ModeAssignment> assignments) {
  std::vector<int> out;
  out.reserve(assignments.size());
  for (const auto& a : assignments) out.push_back(a.mode);
  return out;
}

void score_modes(SampleScore& s) {
  const std::vector<int> m = mode_ids(s.mmgts);
  const std::vector<int> p = mode_ids(s.predictions);
  s.prediction_count = static_cast<int>(p.size());
  s.mmgt_count = static_cast<int>(m.size());
  s.valid_modes = valid_modes(m);
  s.degenerate = s.valid_modes.empty();
  if (s.degenerate || p.empty()) {
    s.coverage = s.validity = s.mmcm = 0.0;
    return;
  }
  s.coverage = coverage_rate(m, p);
  s.validity = validity_rate(m, p);
  s.mmcm = mmcm(s.coverage, s.validity);
}

SampleScore score_sample(const FittedPipeline& pipeline, const PredictionSet& predictions,
                         const MmgtSet& mmgt) {
  const auto start = std::chrono::steady_clock::now();
  predictions.validate(pipeline.config.future_frames);
  SampleScore s;
  s.id = predictions.source_id;
  for (const auto& f : predictions.futures) {
    s.predictions.push_back(pipeline.assign_mode(predictions.past, f));
  }
  for (const auto& m : mmgt.members) {
    s.mmgts.push_back(pipeline.assign_mode(predictions.past, m.future));
  }
  score_modes(s);
  s.apd = apd(predictions.futures);
  if (predictions.ground_truth) s.ade_fde = ade_fde(predictions.futures, *predictions.ground_truth);
  if (!mmgt.empty()) s.mmade_mmfde = mmade_mmfde(predictions.futures, mmgt);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

void aggregate(MetricReport& r) {
  const auto n = static_cast<double>(r.samples.size());
  r.mmcm = r.coverage = r.validity = 0.0;
  r.degenerate_count = r.prediction_count = 0;
  r.total_seconds = 0.0;
  double sums[5] = {0, 0, 0, 0, 0};
  int counts[5] = {0, 0, 0, 0, 0};
  for (const auto& s : r.samples) {
    r.mmcm += s.mmcm;
    r.coverage += s.coverage;
    r.validity += s.validity;
    r.degenerate_count += s.degenerate ? 1 : 0;
    r.prediction_count += s.prediction_count;
    r.total_seconds += s.seconds;
    if (s.apd) {
      sums[0] += *s.apd;
      ++counts[0];
    }
    if (s.ade_fde) {
      sums[1] += s.ade_fde->ade;
      sums[2] += s.ade_fde->fde;
      ++counts[1];
      ++counts[2];
    }
    if (s.mmade_mmfde) {
      sums[3] += s.mmade_mmfde->ade;
      sums[4] += s.mmade_mmfde->fde;
      ++counts[3];
      ++counts[4];
    }
  }
  if (n > 0) {
    r.mmcm /= n;
    r.coverage /= n;
    r.validity /= n;
  }
  r.mmcm_of_means = mmcm(r.coverage, r.validity);
  std::optional<double>* outs[5] = {&r.apd, &r.ade, &r.fde, &r.mmade, &r.mmfde};
  for (int i = 0; i < 5; ++i) {
    *outs[i] = counts[i] > 0 ? std::optional<double>(sums[i] / counts[i]) : std::nullopt;
  }
  r.seconds_per_prediction = r.prediction_count > 0 ? r.total_seconds / r.prediction_count : 0.0;
}

MetricReport score_dataset(const FittedPipeline& pipeline, std::span<const PredictionSet> predictions,
                           std::span<const MmgtSet> mmgts, bool parallel) {
  if (predictions.size() != mmgts.size()) {
    throw InvalidArgument("got " + std::to_string(predictions.size()) + " prediction sets but " +
                          std::to_string(mmgts.size()) + " MMGT sets");
  }
  if (predictions.empty()) throw InvalidArgument("dataset scoring needs at least one sample");
  MetricReport r;
  r.samples.resize(predictions.size());
  std::vector<std::exception_ptr> errors(predictions.size());
  const long n = static_cast<long>(predictions.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      r.samples[i] = score_sample(pipeline, predictions[i], mmgts[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const DegenerateError& e) {
      throw DegenerateError("sample " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw InvalidArgument("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  aggregate(r);
  return r;
}

}  // namespace mmcm
