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
#include <random>
#include <string>
#include <vector>

#include "navsup/camera.hpp"
#include "navsup/common.hpp"

namespace navsup::synth {

struct Rect {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
  }
  bool overlaps(const Rect& o) const {
    return min.x() < o.max.x() && o.min.x() < max.x() && min.y() < o.max.y() && o.min.y() < max.y();
  }
  Vec2 center() const { return 0.5 * (min + max); }
};

// Axis-aligned box standing on the floor.
struct Box {
  Vec2 center = Vec2::Zero();
  Vec3 size = Vec3::Ones();
  Rgb8 color{160, 60, 40};

  Rect footprint() const {
    const Vec2 half = 0.5 * size.head<2>();
    return Rect{center - half, center + half};
  }
};

struct TargetPatch {
  Rect area;
  std::string class_name = "target";
  Rgb8 color{40, 180, 60};
};

// Floor is z = 0 over `floor`; rays leaving it without hitting anything get no depth.
struct SceneSpec {
  std::string id = "scene";
  std::uint64_t seed = 0;
  Rect floor{Vec2(0, 0), Vec2(4, 4)};
  Rgb8 floor_color{128, 128, 128};
  std::vector<Box> boxes;
  std::optional<TargetPatch> target;
  CameraIntrinsics intrinsics;
  std::vector<Pose> poses;
  Vec2 start = Vec2::Zero();
  double depth_noise_sigma = 0.0;  // meters
  std::string instruction;

  void validate() const {
    intrinsics.validate();
    for (const auto& b : boxes) {
      if (!(b.size.minCoeff() > 0.0)) throw Error(ErrorKind::kInvalidInput, "box sizes must be positive");
    }
    if (target) {
      for (const auto& b : boxes) {
        if (target->area.overlaps(b.footprint())) {
          throw Error(ErrorKind::kInvalidInput, "target patch overlaps a box footprint");
        }
      }
    }
    for (const auto& p : poses) {
      p.validate();
      if (!(p.translation.z() > 0.0)) throw Error(ErrorKind::kInvalidInput, "camera below the floor");
    }
    if (!(depth_noise_sigma >= 0.0)) throw Error(ErrorKind::kInvalidInput, "depth noise must be >= 0");
  }
};

enum class HitKind { kNone, kFloor, kTarget, kBox };

struct RayHit {
  HitKind kind = HitKind::kNone;
  double t = kInf;  // ray parameter; equals z-depth for camera rays with unit z component
  int box = -1;
  int face = -1;  // 0..5 = -x, +x, -y, +y, -z, +z
};

// Nearest hit with t > 0 for origin + t * dir.
inline RayHit cast_ray(const SceneSpec& spec, const Vec3& origin, const Vec3& dir) {
  RayHit hit;
  if (dir.z() < 0.0) {
    const double t = -origin.z() / dir.z();
    const Vec3 p = origin + t * dir;
    if (t > 0.0 && spec.floor.contains(p.head<2>())) {
      hit.t = t;
      hit.kind = spec.target && spec.target->area.contains(p.head<2>()) ? HitKind::kTarget : HitKind::kFloor;
    }
  }
  for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
    const auto& box = spec.boxes[b];
    const Vec3 lo(box.center.x() - 0.5 * box.size.x(), box.center.y() - 0.5 * box.size.y(), 0.0);
    const Vec3 hi(box.center.x() + 0.5 * box.size.x(), box.center.y() + 0.5 * box.size.y(), box.size.z());
    double t_near = -kInf;
    double t_far = kInf;
    int face = -1;
    bool miss = false;
    for (int a = 0; a < 3; ++a) {
      if (dir[a] == 0.0) {
        if (origin[a] < lo[a] || origin[a] > hi[a]) miss = true;
        continue;
      }
      double t0 = (lo[a] - origin[a]) / dir[a];
      double t1 = (hi[a] - origin[a]) / dir[a];
      int f0 = 2 * a;
      if (t0 > t1) {
        std::swap(t0, t1);
        f0 = 2 * a + 1;
      }
      if (t0 > t_near) {
        t_near = t0;
        face = f0;
      }
      t_far = std::min(t_far, t1);
    }
    if (miss || t_near > t_far || !(t_near > 0.0)) continue;
    if (t_near < hit.t) {
      hit.t = t_near;
      hit.kind = HitKind::kBox;
      hit.box = static_cast<int>(b);
      hit.face = face;
    }
  }
  return hit;
}

namespace detail {

inline Rgb8 shade(const Rgb8& c, double k) {
  auto ch = [&](std::uint8_t v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v * k), 0L, 255L)); };
  return Rgb8{ch(c[0]), ch(c[1]), ch(c[2])};
}

}  // namespace detail

// Ray-cast depth and color for one scripted pose, with exact target / obstacle masks.
inline CameraFrame render(const SceneSpec& spec, std::size_t pose_index) {
  if (pose_index >= spec.poses.size()) throw Error(ErrorKind::kInvalidInput, "pose index out of range");
  const auto& intr = spec.intrinsics;
  CameraFrame frame;
  frame.id = "frame_" + std::to_string(pose_index);
  frame.intrinsics = intr;
  frame.pose = spec.poses[pose_index];
  frame.depth = DepthFrame(intr.width, intr.height);
  frame.color = ColorImage(intr.width, intr.height);
  LabeledMask target(frame.id, MaskKind::kTarget, intr.width, intr.height);
  LabeledMask obstacle(frame.id, MaskKind::kObstacle, intr.width, intr.height);
  if (spec.target) target.class_name = spec.target->class_name;
  obstacle.class_name = "box";

  std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + pose_index + 1);
  std::normal_distribution<double> noise(0.0, spec.depth_noise_sigma > 0.0 ? spec.depth_noise_sigma : 1.0);

  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir = frame.pose.rotation * intr.ray(u, v);
      const RayHit hit = cast_ray(spec, frame.pose.translation, dir);
      if (hit.kind == HitKind::kNone) continue;
      double depth = hit.t;
      if (spec.depth_noise_sigma > 0.0) depth += noise(rng);
      frame.depth.set(u, v, depth);
      const Vec3 p = frame.pose.translation + hit.t * dir;
      Rgb8 color;
      switch (hit.kind) {
        case HitKind::kFloor: {
          const bool checker = (static_cast<long>(std::floor(p.x() / 0.5)) + static_cast<long>(std::floor(p.y() / 0.5))) % 2 == 0;
          color = detail::shade(spec.floor_color, checker ? 1.0 : 0.85);
          break;
        }
        case HitKind::kTarget:
          color = spec.target->color;
          target.set(u, v, true);
          break;
        case HitKind::kBox:
          color = detail::shade(spec.boxes[hit.box].color, hit.face == 5 ? 1.0 : 0.7 + 0.05 * hit.face);
          obstacle.set(u, v, true);
          break;
        case HitKind::kNone: break;
      }
      frame.color.at(u, v) = color;
    }
  }
  frame.masks.push_back(std::move(target));
  frame.masks.push_back(std::move(obstacle));
  return frame;
}

struct Footprints {
  std::vector<Rect> blocked;
  std::optional<Rect> target;
};

inline Footprints analytic_footprints(const SceneSpec& spec) {
  Footprints fp;
  for (const auto& b : spec.boxes) fp.blocked.push_back(b.footprint());
  if (spec.target) fp.target = spec.target->area;
  return fp;
}

// Default rig: a straight-down overview of the whole floor first, then two oblique views. At this image
// size the overview samples a 4 m floor at under 4 mm per pixel, so 5 mm BEV cells see no holes.
inline CameraIntrinsics default_intrinsics() {
  CameraIntrinsics k;
  k.width = 1280;
  k.height = 960;
  k.fx = k.fy = 1120.0;
  k.cx = 639.5;
  k.cy = 479.5;
  return k;
}

inline std::vector<Pose> default_camera_script(const Rect& floor, const CameraIntrinsics& k) {
  const Vec2 c = floor.center();
  const Vec2 half = 0.5 * (floor.max - floor.min);
  // Height at which the overview sees the whole floor plus a 10% border.
  const double h = 1.1 * std::max(half.x() * k.fx / (0.5 * k.width), half.y() * k.fy / (0.5 * k.height));
  std::vector<Pose> poses;
  poses.push_back(look_at(Vec3(c.x(), c.y(), h), Vec3(c.x(), c.y(), 0.0), Vec3(0, 1, 0)));
  poses.push_back(look_at(Vec3(c.x(), floor.min.y() - 0.5, 2.5), Vec3(c.x(), c.y(), 0.0)));
  poses.push_back(look_at(Vec3(floor.max.x() + 0.5, c.y(), 2.5), Vec3(c.x(), c.y(), 0.0)));
  return poses;
}

namespace detail {

inline SceneSpec base_scene(std::string id, Rect floor, Vec2 start, Rect target, std::uint64_t seed) {
  SceneSpec s;
  s.id = std::move(id);
  s.seed = seed;
  s.floor = floor;
  s.start = start;
  s.target = TargetPatch{target, "marker", Rgb8{40, 180, 60}};
  s.intrinsics = default_intrinsics();
  s.poses = default_camera_script(floor, s.intrinsics);
  s.instruction = "walk to the green marker";
  return s;
}

inline Box wall(Vec2 lo, Vec2 hi, double height = 1.0) {
  Box b;
  b.center = 0.5 * (lo + hi);
  b.size = Vec3(hi.x() - lo.x(), hi.y() - lo.y(), height);
  return b;
}

inline Rect rect(double x0, double y0, double x1, double y1) { return Rect{Vec2(x0, y0), Vec2(x1, y1)}; }

}  // namespace detail

// Scripted planning scenes: corridors, gaps in walls, dead ends and targets hidden behind obstacles.
inline std::vector<SceneSpec> scene_suite() {
  using detail::base_scene;
  using detail::rect;
  using detail::wall;
  std::vector<SceneSpec> out;

  {
    auto s = base_scene("corridor_straight", rect(0, 0, 4, 1.4), Vec2(0.6, 0.7), rect(3.2, 0.5, 3.5, 0.9), 1);
    out.push_back(s);
  }
  {
    auto s = base_scene("corridor_l_turn", rect(0, 0, 4, 4), Vec2(0.7, 0.7), rect(3.1, 3.2, 3.5, 3.5), 2);
    s.boxes.push_back(wall(Vec2(0.0, 1.6), Vec2(2.6, 4.0), 2.0));
    out.push_back(s);
  }
  {
    auto s = base_scene("corridor_pillar", rect(0, 0, 4, 2.0), Vec2(0.6, 1.0), rect(3.3, 0.8, 3.6, 1.2), 3);
    s.boxes.push_back(wall(Vec2(1.8, 0.85), Vec2(2.2, 1.15), 0.8));
    out.push_back(s);
  }
  {
    auto s = base_scene("gap_in_wall_center", rect(0, 0, 4, 4), Vec2(2.0, 0.7), rect(1.8, 3.1, 2.2, 3.4), 4);
    s.boxes.push_back(wall(Vec2(0.0, 1.9), Vec2(1.45, 2.1)));
    s.boxes.push_back(wall(Vec2(2.55, 1.9), Vec2(4.0, 2.1)));
    out.push_back(s);
  }
  {
    auto s = base_scene("gap_in_wall_side", rect(0, 0, 4, 4), Vec2(0.9, 0.7), rect(0.7, 3.1, 1.1, 3.4), 5);
    s.boxes.push_back(wall(Vec2(0.0, 1.9), Vec2(2.45, 2.1)));
    out.push_back(s);
  }
  {
    auto s = base_scene("dead_end_detour", rect(0, 0, 4, 4), Vec2(2.0, 0.6), rect(1.8, 3.3, 2.2, 3.6), 6);
    s.boxes.push_back(wall(Vec2(1.2, 1.2), Vec2(1.4, 2.8)));
    s.boxes.push_back(wall(Vec2(2.6, 1.2), Vec2(2.8, 2.8)));
    s.boxes.push_back(wall(Vec2(1.2, 2.6), Vec2(2.8, 2.8)));
    out.push_back(s);
  }
  {
    auto s = base_scene("goal_behind_box", rect(0, 0, 4, 4), Vec2(2.0, 0.6), rect(1.8, 3.0, 2.2, 3.3), 7);
    s.boxes.push_back(wall(Vec2(1.4, 1.8), Vec2(2.6, 2.4), 1.2));
    out.push_back(s);
  }
  {
    auto s = base_scene("goal_behind_low_box", rect(0, 0, 4, 4), Vec2(0.8, 0.8), rect(2.9, 2.9, 3.3, 3.3), 8);
    s.boxes.push_back(wall(Vec2(2.1, 2.1), Vec2(2.7, 2.7), 0.4));
    out.push_back(s);
  }
  {
    auto s = base_scene("slalom", rect(0, 0, 4, 3), Vec2(0.6, 1.5), rect(3.3, 1.3, 3.6, 1.7), 9);
    s.boxes.push_back(wall(Vec2(1.2, 0.0), Vec2(1.5, 1.9)));
    s.boxes.push_back(wall(Vec2(2.5, 1.1), Vec2(2.8, 3.0)));
    out.push_back(s);
  }
  {
    auto s = base_scene("open_diagonal", rect(0, 0, 4, 4), Vec2(0.8, 0.8), rect(3.0, 3.0, 3.3, 3.3), 10);
    out.push_back(s);
  }
  {
    auto s = base_scene("u_turn_corridor", rect(0, 0, 4, 3.2), Vec2(0.7, 0.7), rect(0.5, 2.4, 0.9, 2.7), 11);
    s.boxes.push_back(wall(Vec2(0.0, 1.5), Vec2(3.0, 1.7)));
    out.push_back(s);
  }
  return out;
}

// Target enclosed by walls on every side; planning must fail with an unreachable goal.
inline SceneSpec walled_off_scene() {
  auto s = detail::base_scene("walled_off", detail::rect(0, 0, 4, 4), Vec2(0.8, 0.8), detail::rect(2.6, 2.6, 3.0, 3.0),
                              12);
  s.boxes.push_back(detail::wall(Vec2(2.0, 2.0), Vec2(3.6, 2.15)));
  s.boxes.push_back(detail::wall(Vec2(2.0, 3.45), Vec2(3.6, 3.6)));
  s.boxes.push_back(detail::wall(Vec2(2.0, 2.15), Vec2(2.15, 3.45)));
  s.boxes.push_back(detail::wall(Vec2(3.45, 2.15), Vec2(3.6, 3.45)));
  return s;
}

inline std::optional<SceneSpec> find_preset(const std::string& id) {
  for (auto& s : scene_suite()) {
    if (s.id == id) return s;
  }
  if (id == "walled_off") return walled_off_scene();
  return std::nullopt;
}

}  // namespace navsup::synth
