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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmcm/clustering.hpp"
#include "mmcm/evaluation.hpp"
#include "mmcm/perturb.hpp"
#include "mmcm/pipeline.hpp"

namespace mmcm {

// Column order of report.csv.
inline constexpr const char* kReportColumns = "MMCM,C,V,APD,ADE,FDE,MMADE,MMFDE";

// Dataset means, per-sample scores and mode occupancy. Wall-clock fields are
// left out so reruns produce identical bytes; see timing_json.
std::string report_json(const MetricReport& report, const FittedPipeline& pipeline);
std::string report_csv(const MetricReport& report);
std::string timing_json(const MetricReport& report);

// Scatter of the first two layout axes coloured by mode; noise in grey and
// centroids as crosses.
std::string layout_svg(const FittedPipeline& pipeline);

// Line plot over the sweep levels with `left` on the left axis and `right`
// on the right axis. Metric names as in sweep_csv.
std::string sweep_svg(const SweepResult& result, const std::string& left, const std::string& right);

std::string ranking_csv(std::span<const RankingRow> rows, std::span<const std::string> methods);
std::string stability_csv(std::span<const StabilityRow> rows);

}  // namespace mmcm
