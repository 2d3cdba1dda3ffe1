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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <tuple>
#include <vector>

#include "navsup/bev.hpp"
#include "navsup/camera.hpp"
#include "navsup/common.hpp"
#include "navsup/costmap.hpp"
#include "navsup/plane.hpp"
#include "navsup/trajectory.hpp"

namespace navsup {

// Arrival times from the start cell, in cost-weighted meters. Unreachable cells hold +inf.
struct ArrivalField {
  Grid2<double> time;
  Cell start;
  std::vector<std::uint32_t> acceptance_order;  // linear indices in the order the sweep froze them

  int rows() const noexcept { return time.rows(); }
  int cols() const noexcept { return time.cols(); }
  bool reachable(Cell c) const noexcept { return time.contains(c) && std::isfinite(time[c]); }
};

namespace detail {

// Solves (T - a)^2 + (T - b)^2 = (h f)^2 with the usual one-sided fallback.
inline double upwind_update(double a, double b, double hf) {
  if (a > b) std::swap(a, b);
  if (!std::isfinite(a)) return kInf;
  if (!std::isfinite(b) || b - a >= hf) return a + hf;
  const double diff = a - b;
  return 0.5 * (a + b + std::sqrt(2.0 * hf * hf - diff * diff));
}

}  // namespace detail

// First-order upwind Fast Marching with two stencils: the axis-aligned one with spacing h and the
// diagonal one with spacing sqrt(2) h; each cell takes the smaller of the two solutions. Slowness
// at a cell is its cost.
inline ArrivalField solve_eikonal(const CostMap& cm, Cell start) {
  if (!cm.contains(start)) throw Error(ErrorKind::kInvalidInput, "start cell outside the cost map");
  if (!cm.is_free(start)) throw Error(ErrorKind::kStartBlocked, "start cell is blocked");

  ArrivalField field;
  field.time = Grid2<double>(cm.rows(), cm.cols(), kInf);
  field.start = start;
  Grid2<std::uint8_t> accepted(cm.rows(), cm.cols(), 0);
  const double h = cm.resolution;
  const double hd = std::sqrt(2.0) * h;

  auto frozen = [&](int r, int c) -> double {
    if (!accepted.contains(r, c) || !accepted(r, c)) return kInf;
    return field.time(r, c);
  };
  auto tentative = [&](Cell x) {
    const double f = cm.cost[x];
    const int r = x.row, c = x.col;
    const double axis = detail::upwind_update(std::min(frozen(r - 1, c), frozen(r + 1, c)),
                                              std::min(frozen(r, c - 1), frozen(r, c + 1)), h * f);
    const double diag = detail::upwind_update(std::min(frozen(r - 1, c - 1), frozen(r + 1, c + 1)),
                                              std::min(frozen(r - 1, c + 1), frozen(r + 1, c - 1)), hd * f);
    return std::min(axis, diag);
  };

  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> band;
  field.time[start] = 0.0;
  band.emplace(0.0, static_cast<std::uint32_t>(field.time.index(start)));
  field.acceptance_order.reserve(cm.free_count());

  while (!band.empty()) {
    const auto [t, idx] = band.top();
    band.pop();
    if (accepted[idx] || t > field.time[idx]) continue;
    accepted[idx] = 1;
    field.acceptance_order.push_back(idx);
    const Cell x = field.time.cell(idx);
    for (const auto& d : kNeighbor8) {
      const Cell nb{x.row + d[0], x.col + d[1]};
      if (!cm.is_free(nb) || accepted[nb]) continue;
      const double cand = tentative(nb);
      if (cand < field.time[nb]) {
        field.time[nb] = cand;
        band.emplace(cand, static_cast<std::uint32_t>(field.time.index(nb)));
      }
    }
  }
  return field;
}

inline bool row_major_less(const Cell& a, const Cell& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

// Picks the free, reachable cell touching the target region that is closest to the region centroid
// (ties: earlier arrival, then row-major order). Regions with no free cell around them fall back to
// the reachable free cell nearest the centroid.
inline Cell select_goal(const TargetRegion& region, const CostMap& cm, const ArrivalField& field) {
  if (region.empty()) throw Error(ErrorKind::kInvalidInput, "target region is empty");

  Grid2<std::uint8_t> in_region(cm.rows(), cm.cols(), 0);
  for (const auto& c : region.cells) {
    if (cm.contains(c)) in_region[c] = 1;
  }

  using Key = std::tuple<double, double, int, int>;
  auto key_of = [&](Cell c) {
    return Key{(cm.cell_center(c) - region.centroid).squaredNorm(), field.time[c], c.row, c.col};
  };

  bool any_free_neighbor = false;
  std::optional<Key> best;
  Cell goal{};
  for (int r = 0; r < cm.rows(); ++r) {
    for (int c = 0; c < cm.cols(); ++c) {
      const Cell cell{r, c};
      if (in_region[cell] || !cm.is_free(cell)) continue;
      bool touches = false;
      for (const auto& d : kNeighbor8) {
        const Cell nb{r + d[0], c + d[1]};
        if (in_region.contains(nb) && in_region[nb]) {
          touches = true;
          break;
        }
      }
      if (!touches) continue;
      any_free_neighbor = true;
      if (!field.reachable(cell)) continue;
      const Key k = key_of(cell);
      if (!best || k < *best) {
        best = k;
        goal = cell;
      }
    }
  }
  if (best) return goal;
  if (any_free_neighbor) {
    throw Error(ErrorKind::kGoalUnreachable, "no free cell next to the target region is reachable from the start");
  }

  for (int r = 0; r < cm.rows(); ++r) {
    for (int c = 0; c < cm.cols(); ++c) {
      const Cell cell{r, c};
      if (!cm.is_free(cell) || !field.reachable(cell)) continue;
      const Key k = key_of(cell);
      if (!best || k < *best) {
        best = k;
        goal = cell;
      }
    }
  }
  if (!best) throw Error(ErrorKind::kGoalUnreachable, "no reachable free cell");
  return goal;
}

// Steepest discrete descent on the arrival field from `goal` back to the start; returned start-first.
inline std::vector<Cell> extract_path(const ArrivalField& field, Cell goal) {
  if (!field.reachable(goal)) throw Error(ErrorKind::kGoalUnreachable, "goal has no finite arrival time");
  std::vector<Cell> path{goal};
  Cell cur = goal;
  while (!(cur == field.start)) {
    const double here = field.time[cur];
    std::optional<Cell> next;
    double next_t = here;
    for (const auto& d : kNeighbor8) {  // row-major offsets, so strict < keeps the first on ties
      const Cell nb{cur.row + d[0], cur.col + d[1]};
      if (!field.time.contains(nb)) continue;
      const double t = field.time[nb];
      if (t < next_t) {
        next_t = t;
        next = nb;
      }
    }
    if (!next) {
      throw Error(ErrorKind::kInternalConsistency, "path descent stalled before reaching the start");
    }
    cur = *next;
    path.push_back(cur);
    if (path.size() > field.time.size()) {
      throw Error(ErrorKind::kInternalConsistency, "path descent did not terminate");
    }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace detail {

// True when every sample along a-b (step at most a quarter cell) lies in a free cell.
inline bool segment_is_free(const CostMap& cm, const Vec2& a, const Vec2& b) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.25 * cm.resolution))));
  for (int i = 0; i <= steps; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / steps);
    const auto cell = cm.cell_of(p);
    if (!cell || !cm.is_free(*cell)) return false;
  }
  return true;
}

}  // namespace detail

struct SmoothingParams {
  int window = 5;
  std::size_t num_waypoints = 16;
};

// Moving-average smoothing of the cell-center polyline with pinned endpoints, falling back to the raw
// points around any smoothed segment that enters a blocked cell, then uniform arc-length resampling.
inline Trajectory smooth_and_resample(std::span<const Cell> path, const CostMap& cm,
                                      const SmoothingParams& params = {}) {
  if (path.empty()) throw Error(ErrorKind::kInvalidInput, "cannot smooth an empty path");
  if (params.window < 1 || params.window % 2 == 0) throw Error(ErrorKind::kInvalidInput, "window must be odd");
  if (params.num_waypoints < 2) throw Error(ErrorKind::kInvalidInput, "need at least 2 waypoints");

  const std::size_t n = path.size();
  std::vector<Vec2> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = cm.cell_center(path[i]);

  const int half = params.window / 2;
  std::vector<Vec2> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 sum = Vec2::Zero();
    for (int k = -half; k <= half; ++k) {
      const auto j = static_cast<std::size_t>(
          std::clamp<long long>(static_cast<long long>(i) + k, 0, static_cast<long long>(n) - 1));
      sum += raw[j];
    }
    smooth[i] = sum / static_cast<double>(params.window);
  }
  smooth.front() = raw.front();
  smooth.back() = raw.back();

  // Each pass reverts at least one point, so this terminates within n passes.
  for (std::size_t pass = 0; pass <= n; ++pass) {
    bool clean = true;
    for (std::size_t i = 0; i < n; ++i) {
      const bool point_ok = [&] {
        const auto cell = cm.cell_of(smooth[i]);
        return cell && cm.is_free(*cell);
      }();
      const bool seg_ok = i == 0 || detail::segment_is_free(cm, smooth[i - 1], smooth[i]);
      if (point_ok && seg_ok) continue;
      clean = false;
      smooth[i] = raw[i];
      if (!seg_ok) smooth[i - 1] = raw[i - 1];
    }
    if (clean) break;
  }

  const auto dedup = remove_consecutive_duplicates(smooth);
  if (dedup.size() < 2) throw Error(ErrorKind::kInvalidInput, "path has zero length");
  return Trajectory{FrameTag::kPlane, resample_by_arc_length(dedup, params.num_waypoints)};
}

// Dense polyline the waypoints were resampled from; exposed for audits.
inline std::vector<Vec2> cell_centers(std::span<const Cell> path, const CostMap& cm) {
  std::vector<Vec2> out;
  out.reserve(path.size());
  for (const auto& c : path) out.push_back(cm.cell_center(c));
  return out;
}

struct ImageTrajectory {
  Trajectory trajectory;
  std::size_t dropped_behind_camera = 0;
};

// Lifts planar waypoints onto the plane and projects them into the given camera.
inline ImageTrajectory trajectory_to_image(const Trajectory& traj, const CameraIntrinsics& intrinsics,
                                           const Pose& pose, const NavigationPlane& plane) {
  if (traj.frame != FrameTag::kPlane) throw Error(ErrorKind::kInvalidInput, "trajectory is not in the plane frame");
  const PlaneBasis basis = PlaneBasis::of(plane);
  ImageTrajectory out;
  out.trajectory.frame = FrameTag::kImage;
  for (const auto& p : traj.points) {
    const auto proj = project_to_image(basis.lift(p), intrinsics, pose);
    if (proj.behind_camera) {
      ++out.dropped_behind_camera;
      continue;
    }
    out.trajectory.points.push_back(proj.pixel);
  }
  if (out.trajectory.points.empty()) {
    throw Error(ErrorKind::kBehindCamera, "every trajectory point projects behind the camera");
  }
  return out;
}

inline ImageTrajectory trajectory_to_image(const Trajectory& traj, const CameraFrame& frame,
                                           const NavigationPlane& plane) {
  return trajectory_to_image(traj, frame.intrinsics, frame.pose, plane);
}

// Intersects the viewing ray of `pixel` with the plane and returns its planar coordinates.
inline std::optional<Vec2> image_to_plane(const Vec2& pixel, const CameraIntrinsics& intrinsics, const Pose& pose,
                                          const NavigationPlane& plane) {
  const Vec3 dir = pose.rotation * intrinsics.ray(pixel.x(), pixel.y());
  const double denom = plane.normal.dot(dir);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = -signed_height(pose.translation, plane) / denom;
  if (!(t > 0.0)) return std::nullopt;
  return PlaneBasis::of(plane).coordinates(pose.translation + t * dir);
}

}  // namespace navsup
