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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace {

using namespace navsup;

CostMap open_map(int rows, int cols, double res = 1.0) { return CostMap(Vec2::Zero(), res, rows, cols); }

double euclid(Cell a, Cell b, double res) { return res * std::hypot(double(a.row - b.row), double(a.col - b.col)); }

bool adjacent8(Cell a, Cell b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)) == 1;
}

TEST(Eikonal, StartIsZero) {
  const auto f = solve_eikonal(open_map(9, 9), {4, 4});
  EXPECT_EQ(f.time(4, 4), 0.0);
  EXPECT_EQ(f.start, (Cell{4, 4}));
}

TEST(Eikonal, AxisRayIsExact) {
  const auto f = solve_eikonal(open_map(1, 30, 0.5), {0, 0});
  for (int c = 0; c < 30; ++c) EXPECT_DOUBLE_EQ(f.time(0, c), 0.5 * c);
}

TEST(Eikonal, UniformSandwich) {
  for (int n : {1, 2, 7, 33, 64}) {
    const auto cm = open_map(n, n, 0.1);
    for (Cell start : {Cell{0, 0}, Cell{n / 2, n / 3}}) {
      const auto f = solve_eikonal(cm, start);
      const auto d = oracle::dijkstra8(cm, start);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          EXPECT_GE(f.time(r, c), euclid(start, {r, c}, 0.1) - 1e-12);
          EXPECT_LE(f.time(r, c), d.dist(r, c) + 1e-12);
        }
    }
  }
}

TEST(Eikonal, HeterogeneousSandwichAndReachability) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(2, 48);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    const Cell start{rows / 2, cols / 2};
    const auto cm = oracle::random_costmap(rng, rows, cols, 0.25, 0.05, start);
    const auto f = solve_eikonal(cm, start);
    const auto d = oracle::dijkstra8(cm, start);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        ASSERT_EQ(std::isfinite(f.time(r, c)), std::isfinite(d.dist(r, c)));
        if (!std::isfinite(d.dist(r, c))) continue;
        EXPECT_GE(f.time(r, c), euclid(start, {r, c}, 0.05) - 1e-12);
        EXPECT_LE(f.time(r, c), d.dist(r, c) + 1e-12);
      }
  }
}

TEST(Eikonal, AcceptanceOrderIsCausal) {
  std::mt19937_64 rng(32);
  const Cell start{10, 10};
  const auto cm = oracle::random_costmap(rng, 40, 40, 0.2, 0.01, start);
  const auto f = solve_eikonal(cm, start);
  ASSERT_FALSE(f.acceptance_order.empty());
  EXPECT_EQ(f.time.cell(f.acceptance_order.front()), start);
  for (std::size_t i = 1; i < f.acceptance_order.size(); ++i) {
    EXPECT_LE(f.time[std::size_t{f.acceptance_order[i - 1]}], f.time[std::size_t{f.acceptance_order[i]}]);
  }
  for (const auto idx : f.acceptance_order) EXPECT_TRUE(cm.is_free(f.time.cell(idx)));
}

TEST(Eikonal, SealedCellIsUnreachable) {
  auto cm = open_map(9, 9);
  for (int r = 5; r <= 7; ++r)
    for (int c = 5; c <= 7; ++c)
      if (!(r == 6 && c == 6)) cm.block({r, c});
  const auto f = solve_eikonal(cm, {0, 0});
  EXPECT_FALSE(f.reachable({6, 6}));
  EXPECT_TRUE(std::isinf(f.time(6, 6)));
  EXPECT_TRUE(f.reachable({8, 8}));
}

TEST(Eikonal, BlockedStartIsAnError) {
  auto cm = open_map(4, 4);
  cm.block({1, 1});
  try {
    solve_eikonal(cm, {1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kStartBlocked);
  }
}

TEST(Eikonal, CostScalingScalesTimeAndKeepsPath) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Cell start{2, 3};
    auto cm = oracle::random_costmap(rng, 30, 30, 0.15, 0.02, start);
    auto scaled = cm;
    const double lambda = 4.0;  // a power of two keeps the products exact
    for (auto& c : scaled.cost.data())
      if (std::isfinite(c)) c *= lambda;
    const auto a = solve_eikonal(cm, start);
    const auto b = solve_eikonal(scaled, start);
    for (std::size_t i = 0; i < a.time.size(); ++i) {
      if (std::isfinite(a.time[i])) {
        EXPECT_DOUBLE_EQ(b.time[i], lambda * a.time[i]);
      }
    }
    const Cell goal{27, 25};
    if (!a.reachable(goal)) continue;
    EXPECT_EQ(extract_path(a, goal), extract_path(b, goal));
  }
}

TEST(ExtractPath, GoalIsStart) {
  const auto f = solve_eikonal(open_map(5, 5), {2, 2});
  EXPECT_EQ(extract_path(f, {2, 2}), (std::vector<Cell>{{2, 2}}));
}

TEST(ExtractPath, OpenDiagonal) {
  const auto cm = open_map(20, 20, 0.1);
  const auto f = solve_eikonal(cm, {0, 0});
  const auto path = extract_path(f, {10, 10});
  const auto d = oracle::dijkstra8(cm, {0, 0});
  ASSERT_EQ(path.size(), oracle::dijkstra_path(d, {10, 10}).size());
  EXPECT_EQ(path.size(), 11u);
  for (int i = 0; i <= 10; ++i) EXPECT_EQ(path[i], (Cell{i, i}));
}

TEST(ExtractPath, WallWithSingleGap) {
  auto cm = open_map(21, 21, 0.1);
  for (int c = 0; c < 21; ++c)
    if (c != 16) cm.block({10, c});
  const auto f = solve_eikonal(cm, {2, 3});
  const auto path = extract_path(f, {18, 4});
  ASSERT_GE(path.size(), 2u);
  EXPECT_EQ(path.front(), (Cell{2, 3}));
  EXPECT_EQ(path.back(), (Cell{18, 4}));
  bool through_gap = false;
  for (std::size_t i = 0; i < path.size(); ++i) {
    EXPECT_TRUE(cm.is_free(path[i]));
    if (path[i].row == 10) through_gap = through_gap || path[i].col == 16;
    if (i > 0) {
      EXPECT_TRUE(adjacent8(path[i - 1], path[i]));
      EXPECT_LT(f.time[path[i - 1]], f.time[path[i]]);
    }
  }
  EXPECT_TRUE(through_gap);
}

TEST(ExtractPath, SoundOnRandomMaps) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 40; ++trial) {
    const Cell start{0, 0};
    const auto cm = oracle::random_costmap(rng, 32, 32, 0.2, 0.05, start);
    const auto f = solve_eikonal(cm, start);
    for (const Cell goal : {Cell{31, 31}, Cell{15, 20}, Cell{31, 0}}) {
      if (!f.reachable(goal)) {
        EXPECT_THROW(extract_path(f, goal), Error);
        continue;
      }
      const auto path = extract_path(f, goal);
      EXPECT_EQ(path.front(), start);
      EXPECT_EQ(path.back(), goal);
      for (std::size_t i = 1; i < path.size(); ++i) {
        EXPECT_TRUE(cm.is_free(path[i]));
        EXPECT_TRUE(adjacent8(path[i - 1], path[i]));
        EXPECT_LT(f.time[path[i - 1]], f.time[path[i]]);
      }
    }
  }
}

TEST(Oracle, TightBacktracksAreOptimal) {
  std::mt19937_64 rng(39);
  for (int trial = 0; trial < 30; ++trial) {
    const Cell start{3, 4};
    const auto cm = oracle::random_costmap(rng, 30, 30, 0.2, 0.05, start);
    const auto d = oracle::dijkstra8(cm, start);
    for (bool diag : {true, false}) {
      const auto path = oracle::tight_backtrack(d, cm, {25, 27}, diag);
      if (!std::isfinite(d.dist(25, 27))) {
        EXPECT_TRUE(path.empty());
        continue;
      }
      ASSERT_EQ(path.front(), start);
      double cost = 0.0;
      for (std::size_t i = 1; i < path.size(); ++i) {
        ASSERT_TRUE(adjacent8(path[i - 1], path[i]));
        const bool diagonal = path[i].row != path[i - 1].row && path[i].col != path[i - 1].col;
        cost += (diagonal ? std::sqrt(2.0) : 1.0) * 0.05 * cm.cost[path[i]];
      }
      EXPECT_NEAR(cost, d.dist(25, 27), 1e-9);
    }
  }
}

TargetRegion region_of(std::vector<Cell> cells, const CostMap& cm) {
  TargetRegion r;
  r.cells = std::move(cells);
  Vec2 sum = Vec2::Zero();
  for (const auto& c : r.cells) sum += cm.cell_center(c);
  r.centroid = sum / static_cast<double>(r.cells.size());
  return r;
}

TEST(SelectGoal, FreeRegionPicksNearestBoundaryCell) {
  const auto cm = open_map(20, 20, 0.1);
  std::vector<Cell> cells;
  for (int r = 10; r <= 14; ++r)
    for (int c = 10; c <= 12; ++c) cells.push_back({r, c});
  const auto region = region_of(cells, cm);
  const auto f = solve_eikonal(cm, {0, 0});
  const Cell goal = select_goal(region, cm, f);
  // Exhaustive: best candidate by (centroid distance, arrival time, row, col).
  std::optional<std::tuple<double, double, int, int>> best;
  Cell expected{};
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 20; ++c) {
      const Cell x{r, c};
      if (std::find(cells.begin(), cells.end(), x) != cells.end()) continue;
      bool touches = false;
      for (const auto& y : cells) touches = touches || adjacent8(x, y);
      if (!touches) continue;
      const auto key = std::make_tuple((cm.cell_center(x) - region.centroid).squaredNorm(), f.time[x], r, c);
      if (!best || key < *best) {
        best = key;
        expected = x;
      }
    }
  EXPECT_EQ(goal, expected);
  EXPECT_EQ(goal, (Cell{12, 9}));  // (12, 13) is as close to the centroid but arrives later
}

TEST(SelectGoal, SingleOpening) {
  auto cm = open_map(15, 15, 0.1);
  // Region at rows 5..7, cols 5..7, surrounded by a blocked ring with one opening at (6, 8).
  for (int r = 4; r <= 8; ++r)
    for (int c = 4; c <= 8; ++c) {
      const bool inside = r >= 5 && r <= 7 && c >= 5 && c <= 7;
      if (!inside && !(r == 6 && c == 8)) cm.block({r, c});
    }
  std::vector<Cell> cells;
  for (int r = 5; r <= 7; ++r)
    for (int c = 5; c <= 7; ++c) cells.push_back({r, c});
  const auto f = solve_eikonal(cm, {0, 14});
  EXPECT_EQ(select_goal(region_of(cells, cm), cm, f), (Cell{6, 8}));
}

TEST(SelectGoal, FallbackAndErrors) {
  auto cm = open_map(10, 10, 0.1);
  const auto f = solve_eikonal(cm, {0, 0});
  EXPECT_THROW(select_goal(TargetRegion{}, cm, f), Error);

  // Region covers everything except a single free cell: that cell touches it.
  std::vector<Cell> all;
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c)
      if (!(r == 0 && c == 0)) all.push_back({r, c});
  EXPECT_EQ(select_goal(region_of(all, cm), cm, f), (Cell{0, 0}));

  // Region whose neighbors are all blocked: nearest reachable free cell.
  auto walled = open_map(12, 12, 0.1);
  for (int r = 7; r <= 11; ++r)
    for (int c = 7; c <= 11; ++c) walled.block({r, c});
  const auto g = solve_eikonal(walled, {0, 0});
  const Cell got = select_goal(region_of({{9, 9}}, walled), walled, g);
  EXPECT_TRUE(walled.is_free(got));
  // (6, 9) and (9, 6) tie on distance and arrival time; the lower row wins.
  EXPECT_EQ(got, (Cell{6, 9}));
}

TEST(SelectGoal, UnreachableTarget) {
  auto cm = open_map(12, 12, 0.1);
  for (int c = 0; c < 12; ++c) cm.block({6, c});
  const auto f = solve_eikonal(cm, {0, 0});
  std::vector<Cell> cells{{9, 5}, {9, 6}};
  try {
    select_goal(region_of(cells, cm), cm, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGoalUnreachable);
  }
}

std::vector<Cell> straight_path(int n) {
  std::vector<Cell> p;
  for (int c = 0; c < n; ++c) p.push_back({5, c});
  return p;
}

TEST(Smoothing, StraightLineStaysStraight) {
  const auto cm = open_map(11, 60, 0.01);
  const auto path = straight_path(50);
  const auto t = smooth_and_resample(path, cm, SmoothingParams{5, 16});
  ASSERT_EQ(t.size(), 16u);
  EXPECT_EQ(t.frame, FrameTag::kPlane);
  EXPECT_EQ(t.points.front(), cm.cell_center(path.front()));
  EXPECT_EQ(t.points.back(), cm.cell_center(path.back()));
  const double spacing = 0.49 / 15.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(t.points[i].y(), cm.cell_center({5, 0}).y(), 1e-12);
    if (i > 0) {
      EXPECT_NEAR((t.points[i] - t.points[i - 1]).norm(), spacing, 1e-9);
    }
  }
}

TEST(Smoothing, CornerIsRoundedAndStaysFree) {
  auto cm = open_map(40, 40, 0.01);
  // Blocked block hugging the inside of the corner.
  for (int r = 0; r <= 18; ++r)
    for (int c = 21; c < 40; ++c) cm.block({r, c});
  std::vector<Cell> path;
  for (int c = 0; c <= 20; ++c) path.push_back({20, c});
  for (int r = 19; r >= 0; --r) path.push_back({r, 20});
  const auto t = smooth_and_resample(path, cm, SmoothingParams{5, 40});
  for (const auto& p : t.points) EXPECT_TRUE(cm.is_free(*cm.cell_of(p)));
  EXPECT_EQ(t.points.front(), cm.cell_center(path.front()));
  EXPECT_EQ(t.points.back(), cm.cell_center(path.back()));
  // No resampled point sits exactly on the sharp corner cell center.
  const Vec2 corner = cm.cell_center({20, 20});
  for (const auto& p : t.points) EXPECT_GT((p - corner).norm(), 1e-6);
}

TEST(Smoothing, FallsBackWhereSmoothingCutsIntoObstacles) {
  auto cm = open_map(40, 40, 0.01);
  // Obstacles hug the outside of a U-shaped detour; averaging would cut the inner corner.
  std::vector<Cell> path;
  for (int c = 0; c <= 10; ++c) path.push_back({30, c});
  for (int r = 29; r >= 20; --r) path.push_back({r, 10});
  for (int c = 11; c <= 20; ++c) path.push_back({20, c});
  for (int r = 21; r <= 29; ++r)
    for (int c = 0; c <= 9; ++c) cm.block({r, c});
  for (int r = 0; r <= 19; ++r)
    for (int c = 11; c <= 25; ++c) cm.block({r, c});
  for (int r = 21; r <= 39; ++r)
    for (int c = 11; c <= 25; ++c) cm.block({r, c});
  for (const auto& c : path) ASSERT_TRUE(cm.is_free(c));
  const auto t = smooth_and_resample(path, cm, SmoothingParams{5, 64});
  for (const auto& p : t.points) EXPECT_TRUE(cm.is_free(*cm.cell_of(p)));
}

TEST(Smoothing, ArcLengthPreservedOnLongPaths) {
  const auto cm = open_map(80, 80, 0.01);
  std::vector<Cell> path;
  for (int i = 0; i < 30; ++i) path.push_back({i, 2 * i / 3});
  const auto t = smooth_and_resample(path, cm, SmoothingParams{1, 200});
  const auto centers = cell_centers(path, cm);
  EXPECT_NEAR(polyline_length(t.points), polyline_length(centers), 0.005 * polyline_length(centers));
}

TEST(Smoothing, SingleCellPathIsRejected) {
  const auto cm = open_map(4, 4, 0.01);
  const std::vector<Cell> one{{1, 1}};
  EXPECT_THROW(smooth_and_resample(one, cm, SmoothingParams{}), Error);
}

TEST(Resample, SpacingAndEndpoints) {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = oracle::random_points(rng, 2 + trial % 9);
    const auto out = resample_by_arc_length(pts, 2 + trial % 20);
    EXPECT_EQ(out.front(), pts.front());
    EXPECT_EQ(out.back(), pts.back());
    const double step = polyline_length(pts) / static_cast<double>(out.size() - 1);
    // Each output point lies at arc length k * step along the input polyline.
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + (pts[i] - pts[i - 1]).norm());
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double s = k * step;
      std::size_t seg = 1;
      while (seg + 1 < pts.size() && cum[seg] < s) ++seg;
      const double t = (s - cum[seg - 1]) / (cum[seg] - cum[seg - 1]);
      const Vec2 expected = pts[seg - 1] + std::clamp(t, 0.0, 1.0) * (pts[seg] - pts[seg - 1]);
      EXPECT_LT((out[k] - expected).norm(), 1e-6);
    }
  }
}

CameraIntrinsics test_intrinsics() { return CameraIntrinsics{500.0, 500.0, 319.5, 239.5, 640, 480}; }

TEST(TrajectoryToImage, FootprintProjectsNearBottomCenter) {
  const NavigationPlane ground{Vec3(0, 0, 1), 0.0};
  // Forward-looking camera 1 m up, pitched down, looking along +y.
  const Pose pose = look_at(Vec3(0, 0, 1.0), Vec3(0, 2.0, 0));
  const Vec2 below_ahead(0.0, 0.6);
  const auto proj = project_to_image(Vec3(0, 0.6, 0), test_intrinsics(), pose);
  const Trajectory t{FrameTag::kPlane, {below_ahead, Vec2(0.0, 2.0)}};
  const auto img = trajectory_to_image(t, test_intrinsics(), pose, ground);
  ASSERT_EQ(img.trajectory.size(), 2u);
  EXPECT_EQ(img.trajectory.frame, FrameTag::kImage);
  EXPECT_NEAR(img.trajectory.points[0].x(), 319.5, 1e-9);
  EXPECT_GT(img.trajectory.points[0].y(), 400.0);
  EXPECT_LT((img.trajectory.points[0] - proj.pixel).norm(), 1e-12);
  EXPECT_NEAR(img.trajectory.points[1].x(), 319.5, 1e-9);
  EXPECT_NEAR(img.trajectory.points[1].y(), 239.5, 1e-9);  // the look-at target is the principal point
}

TEST(TrajectoryToImage, RoundTripOntoPlane) {
  const NavigationPlane ground{Vec3(0, 0, 1), 0.0};
  const Pose pose = look_at(Vec3(0.3, -1.0, 1.5), Vec3(0.5, 1.5, 0));
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Trajectory t{FrameTag::kPlane, {}};
  for (int i = 0; i < 20; ++i) t.points.push_back(Vec2(u(rng), 0.5 + 2.0 * u(rng)));
  const auto img = trajectory_to_image(t, test_intrinsics(), pose, ground);
  ASSERT_EQ(img.dropped_behind_camera, 0u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto back = image_to_plane(img.trajectory.points[i], test_intrinsics(), pose, ground);
    ASSERT_TRUE(back.has_value());
    EXPECT_LT((*back - t.points[i]).norm(), 1e-6);
  }
}

TEST(TrajectoryToImage, BehindCameraHandling) {
  const NavigationPlane ground{Vec3(0, 0, 1), 0.0};
  const Pose pose = look_at(Vec3(0, 0, 1.0), Vec3(0, 2.0, 0));
  const Trajectory mixed{FrameTag::kPlane, {Vec2(0, -3), Vec2(0, 1), Vec2(0, 2)}};
  const auto img = trajectory_to_image(mixed, test_intrinsics(), pose, ground);
  EXPECT_EQ(img.dropped_behind_camera, 1u);
  EXPECT_EQ(img.trajectory.size(), 2u);
  const Trajectory behind{FrameTag::kPlane, {Vec2(0, -3), Vec2(0.5, -4)}};
  try {
    trajectory_to_image(behind, test_intrinsics(), pose, ground);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBehindCamera);
  }
}

}  // namespace
