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

#include "mmcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

void check_shapes(std::span<const PoseSequence> futures, const PoseSequence& target) {
  for (const auto& f : futures) {
    if (f.size() != target.size()) {
      throw InvalidArgument("prediction has " + std::to_string(f.size()) +
                            " frames, target has " + std::to_string(target.size()));
    }
    for (std::size_t t = 0; t < f.size(); ++t) {
      if (f[t].rows() != target[t].rows()) throw InvalidArgument("keypoint counts differ");
    }
  }
}

// Root-centered futures, one row each, frames stored consecutively.
Matrix centered_rows(std::span<const PoseSequence> futures) {
  const auto frames = static_cast<Eigen::Index>(futures.front().size());
  const Eigen::Index width = futures.front().front().size();
  Matrix out(static_cast<Eigen::Index>(futures.size()), frames * width);
  for (std::size_t i = 0; i < futures.size(); ++i) {
    for (Eigen::Index t = 0; t < frames; ++t) {
      const Pose& p = futures[i][t];
      for (Eigen::Index j = 0; j < p.rows(); ++j) {
        out.row(i).segment(t * width + 3 * j, 3) = p.row(j) - p.row(0);
      }
    }
  }
  return out;
}

// Smallest average and final-frame displacement of any prediction row.
DisplacementError best_match(const Eigen::Ref<const Matrix>& preds, const Eigen::Ref<const Eigen::RowVectorXd>& target,
                             int frames) {
  const Eigen::Index width = target.size() / frames;
  DisplacementError best{std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < preds.rows(); ++i) {
    double total = 0.0, last = 0.0;
    for (int t = 0; t < frames; ++t) {
      last = (preds.row(i).segment(t * width, width) - target.segment(t * width, width)).norm();
      total += last;
    }
    best.ade = std::min(best.ade, total / frames);
    best.fde = std::min(best.fde, last);
  }
  return best;
}

}  // namespace

std::vector<int> valid_modes(std::span<const int> mmgt_modes) {
  std::vector<int> out;
  for (int m : mmgt_modes) {
    if (m != kAbnormal) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double coverage_rate(std::span<const int> mmgt_modes, std::span<const int> prediction_modes) {
  const std::vector<int> valid = valid_modes(mmgt_modes);
  if (valid.empty()) return 0.0;
  const std::vector<int> hit = valid_modes(prediction_modes);
  std::vector<int> both;
  std::set_intersection(valid.begin(), valid.end(), hit.begin(), hit.end(), std::back_inserter(both));
  return static_cast<double>(both.size()) / static_cast<double>(valid.size());
}

double validity_rate(std::span<const int> mmgt_modes, std::span<const int> prediction_modes) {
  if (prediction_modes.empty()) throw InvalidArgument("validity rate needs at least one prediction");
  const std::vector<int> valid = valid_modes(mmgt_modes);
  std::size_t count = 0;
  for (int m : prediction_modes) {
    if (m != kAbnormal && std::binary_search(valid.begin(), valid.end(), m)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(prediction_modes.size());
}

double mmcm(double coverage, double validity) {
  const double s = coverage + validity;
  return s > 0.0 ? 2.0 * coverage * validity / s : 0.0;
}

std::optional<double> apd(std::span<const PoseSequence> futures) {
  if (futures.size() < 2) return std::nullopt;
  Matrix flat(static_cast<Eigen::Index>(futures.size()), flatten(futures.front()).size());
  for (std::size_t i = 0; i < futures.size(); ++i) {
    const Vector v = flatten(futures[i]);
    if (v.size() != flat.cols()) throw InvalidArgument("predicted futures differ in shape");
    flat.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  // Squared distances from inner products. Near-duplicate pairs lose about
  // 1e-8 m to cancellation, which is far below the averaged value.
  const Vector norms = flat.rowwise().squaredNorm();
  Matrix gram(flat.rows(), flat.rows());
  gram.noalias() = flat * flat.transpose();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < flat.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < flat.rows(); ++j) {
      sum += std::sqrt(std::max(0.0, norms[i] + norms[j] - 2.0 * gram(i, j)));
    }
  }
  const double pairs = static_cast<double>(flat.rows() * (flat.rows() - 1) / 2);
  return sum / pairs;
}

DisplacementError ade_fde(std::span<const PoseSequence> futures, const PoseSequence& target) {
  if (futures.empty()) throw InvalidArgument("ADE/FDE need at least one prediction");
  if (target.empty()) throw InvalidArgument("ADE/FDE need a non-empty target");
  check_shapes(futures, target);
  const std::span<const PoseSequence> one(&target, 1);
  return best_match(centered_rows(futures), centered_rows(one).row(0), static_cast<int>(target.size()));
}

DisplacementError mmade_mmfde(std::span<const PoseSequence> futures, const MmgtSet& mmgt) {
  if (mmgt.empty()) throw InvalidArgument("MMADE/MMFDE need a non-empty MMGT set");
  if (futures.empty()) throw InvalidArgument("ADE/FDE need at least one prediction");
  std::vector<PoseSequence> targets;
  targets.reserve(mmgt.members.size());
  for (const auto& m : mmgt.members) {
    if (m.future.empty()) throw InvalidArgument("ADE/FDE need a non-empty target");
    check_shapes(futures, m.future);
    targets.push_back(m.future);
  }
  const Matrix preds = centered_rows(futures);
  const Matrix gts = centered_rows(targets);
  const int frames = static_cast<int>(targets.front().size());
  const Eigen::Index width = preds.cols() / frames;

  // Per-frame distances of every (prediction, target) pair from inner
  // products, then an exact pass over the candidates near each minimum.
  Matrix ade = Matrix::Zero(preds.rows(), gts.rows());
  Matrix fde(preds.rows(), gts.rows());
  Matrix gram(preds.rows(), gts.rows());
  for (int t = 0; t < frames; ++t) {
    const auto p = preds.middleCols(t * width, width);
    const auto g = gts.middleCols(t * width, width);
    gram.noalias() = p * g.transpose();
    const Vector pn = p.rowwise().squaredNorm();
    const Vector gn = g.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
      for (Eigen::Index k = 0; k < gram.cols(); ++k) {
        const double d = std::sqrt(std::max(0.0, pn[i] + gn[k] - 2.0 * gram(i, k)));
        ade(i, k) += d;
        if (t == frames - 1) fde(i, k) = d;
      }
    }
  }
  constexpr double kSlack = 1e-6;
  DisplacementError sum;
  for (Eigen::Index k = 0; k < gts.rows(); ++k) {
    const double ade_cut = ade.col(k).minCoeff() + kSlack * frames;
    const double fde_cut = fde.col(k).minCoeff() + kSlack;
    DisplacementError best{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
    for (Eigen::Index i = 0; i < preds.rows(); ++i) {
      if (ade(i, k) > ade_cut && fde(i, k) > fde_cut) continue;
      const DisplacementError e = best_match(preds.row(i), gts.row(k), frames);
      if (ade(i, k) <= ade_cut) best.ade = std::min(best.ade, e.ade);
      if (fde(i, k) <= fde_cut) best.fde = std::min(best.fde, e.fde);
    }
    sum.ade += best.ade;
    sum.fde += best.fde;
  }
  const auto k = static_cast<double>(mmgt.members.size());
  return {sum.ade / k, sum.fde / k};
}

}  // namespace mmcm
