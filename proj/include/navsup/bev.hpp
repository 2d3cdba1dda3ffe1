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
#include <optional>
#include <vector>

#include "navsup/camera.hpp"
#include "navsup/common.hpp"
#include "navsup/plane.hpp"

namespace navsup {

// Signed heights relative to the navigation plane.
struct HeightBand {
  double low = -0.5;
  double high = 1.5;

  void validate() const {
    if (!(low < high)) throw Error(ErrorKind::kInvalidInput, "height band requires low < high");
  }
  bool contains(double h) const { return h >= low && h <= high; }
};

struct BevCell {
  Vec3 color_sum = Vec3::Zero();
  double weight_sum = 0.0;
  std::uint32_t observation_count = 0;
  std::uint32_t target_support = 0;
  std::uint32_t obstacle_support = 0;
};

struct BevDiscards {
  std::size_t out_of_band = 0;
  std::size_t out_of_grid = 0;
};

// Top-down metric grid on the navigation plane. Row index follows the plane's second axis, column
// index its first; cell (r, c) covers the half-open box [origin + c*res, origin + (c+1)*res) x likewise.
class BevGrid {
 public:
  BevGrid() = default;
  BevGrid(Vec2 origin, double resolution, int rows, int cols)
      : origin_(std::move(origin)), resolution_(resolution), cells_(rows, cols) {
    if (!(resolution > 0.0)) throw Error(ErrorKind::kInvalidInput, "BEV resolution must be positive");
  }

  // Smallest grid covering [lo, hi] with `padding` meters on every side.
  static BevGrid covering(const Vec2& lo, const Vec2& hi, double resolution, double padding) {
    if (!(resolution > 0.0)) throw Error(ErrorKind::kInvalidInput, "BEV resolution must be positive");
    const Vec2 origin = lo - Vec2::Constant(padding);
    const Vec2 extent = (hi - lo) + Vec2::Constant(2.0 * padding);
    const int cols = std::max(1, static_cast<int>(std::ceil(extent.x() / resolution)));
    const int rows = std::max(1, static_cast<int>(std::ceil(extent.y() / resolution)));
    return BevGrid(origin, resolution, rows, cols);
  }

  const Vec2& origin() const noexcept { return origin_; }
  double resolution() const noexcept { return resolution_; }
  int rows() const noexcept { return cells_.rows(); }
  int cols() const noexcept { return cells_.cols(); }

  const Grid2<BevCell>& cells() const noexcept { return cells_; }
  const BevCell& at(Cell c) const { return cells_[c]; }
  BevCell& at(Cell c) { return cells_[c]; }

  std::optional<Cell> cell_of(const Vec2& planar) const {
    const double fc = std::floor((planar.x() - origin_.x()) / resolution_);
    const double fr = std::floor((planar.y() - origin_.y()) / resolution_);
    if (!(fc >= 0.0 && fr >= 0.0 && fc < cols() && fr < rows())) return std::nullopt;
    return Cell{static_cast<int>(fr), static_cast<int>(fc)};
  }

  Vec2 cell_center(Cell c) const {
    return Vec2(origin_.x() + (c.col + 0.5) * resolution_, origin_.y() + (c.row + 0.5) * resolution_);
  }

  const BevDiscards& discards() const noexcept { return discards_; }
  BevDiscards& discards() noexcept { return discards_; }

  // Elementwise sum of a partial grid with identical geometry.
  void merge(const BevGrid& other) {
    if (other.rows() != rows() || other.cols() != cols() || other.resolution_ != resolution_ ||
        other.origin_ != origin_) {
      throw Error(ErrorKind::kDimensionMismatch, "cannot merge BEV grids with different geometry");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      auto& a = cells_[i];
      const auto& b = other.cells_[i];
      a.color_sum += b.color_sum;
      a.weight_sum += b.weight_sum;
      a.observation_count += b.observation_count;
      a.target_support += b.target_support;
      a.obstacle_support += b.obstacle_support;
    }
    discards_.out_of_band += other.discards_.out_of_band;
    discards_.out_of_grid += other.discards_.out_of_grid;
  }

 private:
  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 0.005;
  Grid2<BevCell> cells_;
  BevDiscards discards_;
};

struct AccumulateStats {
  std::size_t accepted = 0;
  std::size_t out_of_band = 0;
  std::size_t out_of_grid = 0;
};

inline AccumulateStats accumulate_frame(BevGrid& grid, const PointCloud& cloud, const NavigationPlane& plane,
                                        const HeightBand& band = {}) {
  band.validate();
  const PlaneBasis basis = PlaneBasis::of(plane);
  AccumulateStats stats;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (!band.contains(signed_height(p, plane))) {
      ++stats.out_of_band;
      continue;
    }
    const auto cell = grid.cell_of(basis.coordinates(p));
    if (!cell) {
      ++stats.out_of_grid;
      continue;
    }
    auto& c = grid.at(*cell);
    const double w = cloud.weights[i];
    c.color_sum += w * cloud.colors[i];
    c.weight_sum += w;
    ++c.observation_count;
    ++stats.accepted;
  }
  grid.discards().out_of_band += stats.out_of_band;
  grid.discards().out_of_grid += stats.out_of_grid;
  return stats;
}

// Confidence-weighted mean color, or nullopt for a cell nothing landed in.
inline std::optional<Vec3> fused_color(const BevGrid& grid, Cell cell) {
  const auto& c = grid.at(cell);
  if (!(c.weight_sum > 0.0)) return std::nullopt;
  return Vec3(c.color_sum / c.weight_sum);
}

inline AccumulateStats rasterize_mask(BevGrid& grid, const LabeledMask& mask, const CameraFrame& frame,
                                      const NavigationPlane& plane, const HeightBand& band = {}) {
  band.validate();
  if (mask.width != frame.depth.width || mask.height != frame.depth.height ||
      mask.bits.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw Error(ErrorKind::kDimensionMismatch, "mask does not match frame " + frame.id);
  }
  const PlaneBasis basis = PlaneBasis::of(plane);
  AccumulateStats stats;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (!mask.at(u, v) || !frame.depth.is_valid(u, v)) continue;
      const Vec3 p = backproject_pixel(frame, u, v, frame.depth.depth[frame.depth.index(u, v)]);
      if (!band.contains(signed_height(p, plane))) {
        ++stats.out_of_band;
        continue;
      }
      const auto cell = grid.cell_of(basis.coordinates(p));
      if (!cell) {
        ++stats.out_of_grid;
        continue;
      }
      auto& c = grid.at(*cell);
      if (mask.kind == MaskKind::kTarget) {
        ++c.target_support;
      } else {
        ++c.obstacle_support;
      }
      ++stats.accepted;
    }
  }
  return stats;
}

struct TargetRegion {
  std::vector<Cell> cells;  // row-major order
  Vec2 centroid = Vec2::Zero();

  bool empty() const noexcept { return cells.empty(); }
};

namespace detail {

// 3x3 closing with the grid treated as surrounded by empty cells, so regions never grow into the border.
inline Grid2<std::uint8_t> close3x3(const Grid2<std::uint8_t>& in) {
  auto pass = [](const Grid2<std::uint8_t>& src, bool dilate) {
    Grid2<std::uint8_t> dst(src.rows(), src.cols(), 0);
    for (int r = 0; r < src.rows(); ++r) {
      for (int c = 0; c < src.cols(); ++c) {
        bool any = false;
        bool all = true;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const bool on = src.contains(r + dr, c + dc) && src(r + dr, c + dc) != 0;
            any = any || on;
            all = all && on;
          }
        dst(r, c) = (dilate ? any : all) ? 1 : 0;
      }
    }
    return dst;
  };
  Grid2<std::uint8_t> padded(in.rows() + 2, in.cols() + 2, 0);
  for (int r = 0; r < in.rows(); ++r)
    for (int c = 0; c < in.cols(); ++c) padded(r + 1, c + 1) = in(r, c);
  const auto closed = pass(pass(padded, true), false);
  Grid2<std::uint8_t> out(in.rows(), in.cols(), 0);
  for (int r = 0; r < in.rows(); ++r)
    for (int c = 0; c < in.cols(); ++c) out(r, c) = closed(r + 1, c + 1);
  return out;
}

// Largest 8-connected component; ties go to the component found first in row-major order.
inline std::vector<Cell> largest_component(const Grid2<std::uint8_t>& mask) {
  Grid2<std::uint8_t> seen(mask.rows(), mask.cols(), 0);
  std::vector<Cell> best;
  std::vector<Cell> stack;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c) || seen(r, c)) continue;
      std::vector<Cell> comp;
      stack.assign(1, Cell{r, c});
      seen(r, c) = 1;
      while (!stack.empty()) {
        const Cell cur = stack.back();
        stack.pop_back();
        comp.push_back(cur);
        for (const auto& d : kNeighbor8) {
          const Cell nb{cur.row + d[0], cur.col + d[1]};
          if (mask.contains(nb) && mask[nb] && !seen[nb]) {
            seen[nb] = 1;
            stack.push_back(nb);
          }
        }
      }
      if (comp.size() > best.size()) best = std::move(comp);
    }
  }
  std::sort(best.begin(), best.end(),
            [](const Cell& a, const Cell& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  return best;
}

}  // namespace detail

// Thresholds target support, closes small holes, and keeps the largest connected blob.
inline TargetRegion consolidate_target(const BevGrid& grid, std::uint32_t min_support = 3) {
  Grid2<std::uint8_t> mask(grid.rows(), grid.cols(), 0);
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (grid.cells()[i].target_support >= min_support && grid.cells()[i].target_support > 0) {
      mask[i] = 1;
      any = true;
    }
  }
  TargetRegion region;
  if (!any) return region;
  region.cells = detail::largest_component(detail::close3x3(mask));
  Vec2 sum = Vec2::Zero();
  for (const auto& c : region.cells) sum += grid.cell_center(c);
  region.centroid = sum / static_cast<double>(region.cells.size());
  return region;
}

}  // namespace navsup
