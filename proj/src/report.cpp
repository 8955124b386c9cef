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

#include "mmcm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string colour(int mode) {
  if (mode < 0) return "#bbbbbb";
  const double hue = std::fmod(mode * 137.508, 360.0);
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,65%%,45%%)", hue);
  return buf;
}

std::optional<double> metric(const SweepLevel& l, const std::string& name) {
  if (name == "MMCM") return l.mmcm;
  if (name == "C") return l.coverage;
  if (name == "V") return l.validity;
  if (name == "APD") return l.apd;
  if (name == "MMADE") return l.mmade;
  if (name == "MMFDE") return l.mmfde;
  throw InvalidArgument("unknown sweep metric '" + name + "'");
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range range_of(const std::vector<double>& v) {
  Range r;
  if (v.empty()) return r;
  r.lo = *std::min_element(v.begin(), v.end());
  r.hi = *std::max_element(v.begin(), v.end());
  if (r.hi - r.lo < 1e-12) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

}  // namespace

std::string report_json(const MetricReport& r, const FittedPipeline& p) {
  json dataset = {{"MMCM", r.mmcm},
                  {"C", r.coverage},
                  {"V", r.validity},
                  {"MMCM_of_mean_C_V", r.mmcm_of_means},
                  {"APD", opt(r.apd)},
                  {"ADE", opt(r.ade)},
                  {"FDE", opt(r.fde)},
                  {"MMADE", opt(r.mmade)},
                  {"MMFDE", opt(r.mmfde)},
                  {"samples", r.samples.size()},
                  {"degenerate_samples", r.degenerate_count},
                  {"predictions", r.prediction_count}};
  json samples = json::array();
  for (const auto& s : r.samples) {
    std::map<std::string, int> occupancy;
    for (const auto& a : s.predictions) {
      ++occupancy[a.mode == kAbnormal ? std::string("abnormal") : std::to_string(a.mode)];
    }
    std::vector<int> pred_modes, mmgt_modes;
    for (const auto& a : s.predictions) pred_modes.push_back(a.mode);
    for (const auto& a : s.mmgts) mmgt_modes.push_back(a.mode);
    json j = {{"id", s.id},
              {"MMCM", s.mmcm},
              {"C", s.coverage},
              {"V", s.validity},
              {"I", s.prediction_count},
              {"K", s.mmgt_count},
              {"degenerate", s.degenerate},
              {"valid_modes", s.valid_modes},
              {"prediction_modes", pred_modes},
              {"mmgt_modes", mmgt_modes},
              {"occupancy", occupancy},
              {"APD", opt(s.apd)},
              {"ADE", s.ade_fde ? json(s.ade_fde->ade) : json(nullptr)},
              {"FDE", s.ade_fde ? json(s.ade_fde->fde) : json(nullptr)},
              {"MMADE", s.mmade_mmfde ? json(s.mmade_mmfde->ade) : json(nullptr)},
              {"MMFDE", s.mmade_mmfde ? json(s.mmade_mmfde->fde) : json(nullptr)}};
    samples.push_back(std::move(j));
  }
  char fp[20];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(p.fingerprint));
  json out = {{"format", "mmcm-report"},
              {"version", 1},
              {"pipeline_fingerprint", fp},
              {"tau", p.tau},
              {"mode_count", p.modes.mode_count()},
              {"aggregation", "dataset MMCM is the mean of per-sample MMCM"},
              {"dataset", dataset},
              {"per_sample", samples}};
  return out.dump(2) + "\n";
}

std::string report_csv(const MetricReport& r) {
  std::ostringstream out;
  out << kReportColumns << "\n";
  out << num(r.mmcm) << "," << num(r.coverage) << "," << num(r.validity) << "," << csv_opt(r.apd)
      << "," << csv_opt(r.ade) << "," << csv_opt(r.fde) << "," << csv_opt(r.mmade) << ","
      << csv_opt(r.mmfde) << "\n";
  return out.str();
}

std::string timing_json(const MetricReport& r) {
  json per = json::array();
  for (const auto& s : r.samples) per.push_back({{"id", s.id}, {"seconds", s.seconds}});
  json out = {{"total_seconds", r.total_seconds},
              {"seconds_per_prediction", r.seconds_per_prediction},
              {"predictions", r.prediction_count},
              {"per_sample", per}};
  return out.dump(2) + "\n";
}

std::string layout_svg(const FittedPipeline& p) {
  const Matrix& pts = p.embedder.layout.layout;
  constexpr double W = 640, H = 640, M = 40;
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    xs.push_back(pts(i, 0));
    ys.push_back(pts.cols() > 1 ? pts(i, 1) : 0.0);
  }
  const Range rx = range_of(xs), ry = range_of(ys);
  auto sx = [&](double x) { return M + (x - rx.lo) / (rx.hi - rx.lo) * (W - 2 * M); };
  auto sy = [&](double y) { return H - M - (y - ry.lo) / (ry.hi - ry.lo) * (H - 2 * M); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << M << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">Layout: "
    << p.modes.mode_count() << " modes, noise rate " << fmt(p.modes.noise_rate()) << "</text>\n";
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const int mode = p.modes.labels.empty() ? kNoise : p.modes.labels[i];
    s << "<circle class=\"point\" cx=\"" << fmt(sx(xs[i])) << "\" cy=\"" << fmt(sy(ys[i]))
      << "\" r=\"2\" fill=\"" << colour(mode) << "\"/>\n";
  }
  for (const auto& m : p.modes.modes) {
    const double cx = sx(m.centroid(0)), cy = sy(m.centroid.size() > 1 ? m.centroid(1) : 0.0);
    s << "<g class=\"centroid\" stroke=\"black\" stroke-width=\"1.5\"><line x1=\"" << fmt(cx - 5)
      << "\" y1=\"" << fmt(cy - 5) << "\" x2=\"" << fmt(cx + 5) << "\" y2=\"" << fmt(cy + 5)
      << "\"/><line x1=\"" << fmt(cx - 5) << "\" y1=\"" << fmt(cy + 5) << "\" x2=\"" << fmt(cx + 5)
      << "\" y2=\"" << fmt(cy - 5) << "\"/></g>\n";
    s << "<text x=\"" << fmt(cx + 6) << "\" y=\"" << fmt(cy - 6)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << m.id << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string sweep_svg(const SweepResult& r, const std::string& left, const std::string& right) {
  constexpr double W = 640, H = 400, ML = 60, MR = 60, MT = 40, MB = 50;
  std::vector<double> lv, rv, xs;
  for (const auto& l : r.levels) {
    xs.push_back(l.level);
    if (auto v = metric(l, left)) lv.push_back(*v);
    if (auto v = metric(l, right)) rv.push_back(*v);
  }
  const Range rx = range_of(xs), rl = range_of(lv), rr = range_of(rv);
  auto sx = [&](double x) { return ML + (x - rx.lo) / (rx.hi - rx.lo) * (W - ML - MR); };
  auto sy = [&](double y, const Range& g) { return H - MB - (y - g.lo) / (g.hi - g.lo) * (H - MT - MB); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << ML << "\" y=\"22\" font-size=\"14\">" << r.name << "</text>\n";
  s << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\"" << H - MB
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
    << "\" stroke=\"#1f77b4\"/>\n";
  s << "<line x1=\"" << W - MR << "\" y1=\"" << MT << "\" x2=\"" << W - MR << "\" y2=\"" << H - MB
    << "\" stroke=\"#ff7f0e\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double f = t / 4.0;
    const double y = H - MB - f * (H - MT - MB);
    s << "<text x=\"" << ML - 6 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\" fill=\"#1f77b4\">"
      << num(rl.lo + f * (rl.hi - rl.lo)) << "</text>\n";
    s << "<text x=\"" << W - MR + 6 << "\" y=\"" << fmt(y + 4) << "\" fill=\"#ff7f0e\">"
      << num(rr.lo + f * (rr.hi - rr.lo)) << "</text>\n";
  }
  for (double x : xs) {
    s << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << H - MB + 16 << "\" text-anchor=\"middle\">"
      << num(x) << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << r.level_name
    << "</text>\n";
  s << "<text x=\"14\" y=\"" << H / 2 << "\" fill=\"#1f77b4\" transform=\"rotate(-90 14 " << H / 2
    << ")\" text-anchor=\"middle\">" << left << " (left axis)</text>\n";
  s << "<text x=\"" << W - 14 << "\" y=\"" << H / 2 << "\" fill=\"#ff7f0e\" transform=\"rotate(90 "
    << W - 14 << " " << H / 2 << ")\" text-anchor=\"middle\">" << right << " (right axis)</text>\n";
  auto polyline = [&](const std::string& name, const Range& g, const char* stroke) {
    s << "<polyline class=\"series\" data-metric=\"" << name << "\" fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& l : r.levels) {
      const auto v = metric(l, name);
      if (!v) continue;
      s << (first ? "" : " ") << fmt(sx(l.level)) << "," << fmt(sy(*v, g));
      first = false;
    }
    s << "\"/>\n";
  };
  polyline(left, rl, "#1f77b4");
  polyline(right, rr, "#ff7f0e");
  s << "</svg>\n";
  return s.str();
}

std::string ranking_csv(std::span<const RankingRow> rows, std::span<const std::string> methods) {
  std::ostringstream out;
  out << "layout_dims,min_cluster_size,min_samples,mode_count,degenerate";
  for (const auto& m : methods) out << ",MMCM_" << m;
  out << ",ranking\n";
  for (const auto& r : rows) {
    out << r.point.layout_dims << "," << r.point.cluster.min_cluster_size << ","
        << r.point.cluster.min_samples << "," << r.mode_count << "," << (r.degenerate ? 1 : 0);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      out << "," << (m < r.mmcm.size() ? num(r.mmcm[m]) : std::string());
    }
    out << ",";
    for (std::size_t i = 0; i < r.order.size(); ++i) {
      out << (i ? ">" : "") << methods[r.order[i]];
    }
    out << "\n";
  }
  return out.str();
}

std::string stability_csv(std::span<const StabilityRow> rows) {
  std::ostringstream out;
  out << "rank,layout_dims,min_cluster_size,min_samples,mode_count,noise_rate,mean_persistence,score\n";
  int rank = 1;
  for (const auto& r : rows) {
    out << rank++ << "," << r.layout_dims << "," << r.config.min_cluster_size << ","
        << r.config.min_samples << "," << r.mode_count << "," << num(r.noise_rate) << ","
        << num(r.mean_persistence) << "," << num(r.score) << "\n";
  }
  return out.str();
}

}  // namespace mmcm
