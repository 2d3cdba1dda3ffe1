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

#include "navsup/bev.hpp"
#include "navsup/common.hpp"
#include "navsup/distance_transform.hpp"

namespace navsup {

struct CostParams {
  double safety_margin = 0.20;   // meters
  double penalty_radius = 0.50;  // meters
  double penalty_gain = 4.0;

  void validate() const {
    if (!(safety_margin >= 0.0)) throw Error(ErrorKind::kInvalidInput, "safety_margin must be >= 0");
    if (!(penalty_radius >= safety_margin)) {
      throw Error(ErrorKind::kInvalidInput, "penalty_radius must be >= safety_margin");
    }
    if (!(penalty_gain >= 0.0)) throw Error(ErrorKind::kInvalidInput, "penalty_gain must be >= 0");
  }
};

enum class CellState : std::uint8_t { kFree = 0, kBlocked = 1 };

// Planner-facing traversal costs. Blocked cells carry +inf.
struct CostMap {
  Vec2 origin = Vec2::Zero();
  double resolution = 0.005;
  Grid2<CellState> state;
  Grid2<double> cost;

  CostMap() = default;
  CostMap(Vec2 grid_origin, double res, int rows, int cols)
      : origin(std::move(grid_origin)), resolution(res), state(rows, cols, CellState::kFree), cost(rows, cols, 1.0) {}

  int rows() const noexcept { return state.rows(); }
  int cols() const noexcept { return state.cols(); }
  bool contains(Cell c) const noexcept { return state.contains(c); }
  bool is_free(Cell c) const noexcept { return contains(c) && state[c] == CellState::kFree; }

  void block(Cell c) {
    state[c] = CellState::kBlocked;
    cost[c] = kInf;
  }

  Vec2 cell_center(Cell c) const {
    return Vec2(origin.x() + (c.col + 0.5) * resolution, origin.y() + (c.row + 0.5) * resolution);
  }
  std::optional<Cell> cell_of(const Vec2& planar) const {
    const double fc = std::floor((planar.x() - origin.x()) / resolution);
    const double fr = std::floor((planar.y() - origin.y()) / resolution);
    if (!(fc >= 0.0 && fr >= 0.0 && fc < cols() && fr < rows())) return std::nullopt;
    return Cell{static_cast<int>(fr), static_cast<int>(fc)};
  }

  std::size_t free_count() const {
    return static_cast<std::size_t>(std::count(state.data().begin(), state.data().end(), CellState::kFree));
  }
};

// Cells that are blocked before inflation: strong obstacle evidence or never observed.
inline Grid2<std::uint8_t> blocked_seeds(const BevGrid& grid, std::uint32_t obstacle_threshold) {
  Grid2<std::uint8_t> seeds(grid.rows(), grid.cols(), 0);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& c = grid.cells()[i];
    const bool obstacle = obstacle_threshold > 0 ? c.obstacle_support >= obstacle_threshold : c.obstacle_support > 0;
    if (obstacle || c.observation_count == 0) seeds[i] = 1;
  }
  return seeds;
}

// Inflation tolerance in squared cells; absorbs rounding in margin / resolution.
inline constexpr double kInflationSlack = 1e-9;

inline CostMap build_costmap_from_seeds(const Grid2<std::uint8_t>& seeds, const Vec2& origin, double resolution,
                                        const CostParams& params = {}) {
  params.validate();
  const auto sq = squared_distance_transform(seeds);
  CostMap cm(origin, resolution, seeds.rows(), seeds.cols());
  const double margin_cells = params.safety_margin / resolution;
  const double margin_sq = margin_cells * margin_cells + kInflationSlack;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const Cell cell = seeds.cell(i);
    if (sq[i] == kNoSite) continue;  // no blocked cells anywhere: free with unit cost
    if (static_cast<double>(sq[i]) <= margin_sq) {
      cm.block(cell);
      continue;
    }
    const double d = std::sqrt(static_cast<double>(sq[i])) * resolution;
    const double ramp = params.penalty_radius > 0.0 ? std::max(0.0, 1.0 - d / params.penalty_radius) : 0.0;
    cm.cost[cell] = 1.0 + params.penalty_gain * ramp;
  }
  if (cm.free_count() == 0) throw Error(ErrorKind::kNoTraversableSpace, "no traversable space after blocking");
  return cm;
}

inline CostMap build_costmap(const BevGrid& grid, const CostParams& params = {}, std::uint32_t obstacle_threshold = 3) {
  return build_costmap_from_seeds(blocked_seeds(grid, obstacle_threshold), grid.origin(), grid.resolution(), params);
}

}  // namespace navsup
