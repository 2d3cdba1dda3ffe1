// Copyright 2026 The navsup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "navsup/common.hpp"
#include "navsup/trajectory.hpp"

namespace navsup {

namespace detail {

inline void require_same_frame(const Trajectory& a, const Trajectory& b) {
  if (a.frame != b.frame) throw Error(ErrorKind::kInvalidInput, "trajectories are in different frames");
}

}  // namespace detail

// Average displacement error over index-aligned waypoints.
inline double ade(const Trajectory& pred, const Trajectory& gt) {
  detail::require_same_frame(pred, gt);
  if (pred.empty() || gt.empty()) throw Error(ErrorKind::kInvalidInput, "ADE of an empty trajectory");
  if (pred.size() != gt.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "ADE requires equal lengths (" + std::to_string(pred.size()) + " vs " +
                                                   std::to_string(gt.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) sum += (pred.points[t] - gt.points[t]).norm();
  return sum / static_cast<double>(pred.size());
}

// Final displacement error.
inline double fde(const Trajectory& pred, const Trajectory& gt) {
  detail::require_same_frame(pred, gt);
  if (pred.empty() || gt.empty()) throw Error(ErrorKind::kInvalidInput, "FDE of an empty trajectory");
  return (pred.points.back() - gt.points.back()).norm();
}

struct DtwResult {
  double total_cost = 0.0;
  std::size_t path_length = 0;  // aligned pairs on the backtracked warping path
  double normalized = 0.0;
};

// Classic DTW with Euclidean local cost and match / insert / delete steps. The warping path is
// recovered preferring diagonal, then vertical (advance pred), then horizontal (advance gt) among
// equally cheap predecessors, which makes its length deterministic.
inline DtwResult dtw(const Trajectory& pred, const Trajectory& gt) {
  detail::require_same_frame(pred, gt);
  if (pred.empty() || gt.empty()) throw Error(ErrorKind::kInvalidInput, "DTW of an empty trajectory");
  const std::size_t n = pred.size();
  const std::size_t m = gt.size();
  Grid2<double> acc(static_cast<int>(n), static_cast<int>(m), kInf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double local = (pred.points[i] - gt.points[j]).norm();
      double prev;
      if (i == 0 && j == 0) {
        prev = 0.0;
      } else {
        prev = kInf;
        if (i > 0 && j > 0) prev = std::min(prev, acc(int(i - 1), int(j - 1)));
        if (i > 0) prev = std::min(prev, acc(int(i - 1), int(j)));
        if (j > 0) prev = std::min(prev, acc(int(i), int(j - 1)));
      }
      acc(int(i), int(j)) = prev + local;
    }
  }

  std::size_t i = n - 1;
  std::size_t j = m - 1;
  std::size_t length = 1;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc(int(i - 1), int(j - 1));
      const double up = acc(int(i - 1), int(j));
      const double left = acc(int(i), int(j - 1));
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    ++length;
  }

  DtwResult out;
  out.total_cost = acc(int(n - 1), int(m - 1));
  out.path_length = length;
  out.normalized = out.total_cost / static_cast<double>(length);
  return out;
}

inline double dtw_norm(const Trajectory& pred, const Trajectory& gt) { return dtw(pred, gt).normalized; }

struct MetricReport {
  double ade = 0.0;
  double fde = 0.0;
  double dtw_norm = 0.0;
  std::size_t length_pred = 0;
  std::size_t length_gt = 0;
};

// Scores one pair. With `resample_count`, both trajectories are first resampled to that many points by
// arc length; without it they must already have equal lengths.
inline MetricReport evaluate(const Trajectory& pred, const Trajectory& gt,
                             std::optional<std::size_t> resample_count = std::nullopt) {
  MetricReport report;
  report.length_pred = pred.size();
  report.length_gt = gt.size();
  const Trajectory p = resample_count ? resample(pred, *resample_count) : pred;
  const Trajectory g = resample_count ? resample(gt, *resample_count) : gt;
  report.ade = ade(p, g);
  report.fde = fde(p, g);
  report.dtw_norm = dtw_norm(p, g);
  return report;
}

}  // namespace navsup
