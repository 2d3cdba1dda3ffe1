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
#include <span>
#include <string>
#include <vector>

#include "navsup/common.hpp"

namespace navsup {

enum class FrameTag { kPlane, kImage };

inline const char* to_string(FrameTag tag) { return tag == FrameTag::kPlane ? "plane" : "image"; }

inline FrameTag frame_tag_from_string(const std::string& s) {
  if (s == "plane") return FrameTag::kPlane;
  if (s == "image") return FrameTag::kImage;
  throw Error(ErrorKind::kParse, "unknown frame tag '" + s + "'");
}

// Planar meters (kPlane) or image pixels (kImage).
struct Trajectory {
  FrameTag frame = FrameTag::kPlane;
  std::vector<Vec2> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

inline double polyline_length(std::span<const Vec2> pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  return total;
}

inline std::vector<Vec2> remove_consecutive_duplicates(std::span<const Vec2> pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (out.empty() || p != out.back()) out.push_back(p);
  }
  return out;
}

// `count` points spaced uniformly by arc length; the first and last input points are kept exactly.
inline std::vector<Vec2> resample_by_arc_length(std::span<const Vec2> pts, std::size_t count) {
  if (pts.empty()) throw Error(ErrorKind::kInvalidInput, "cannot resample an empty polyline");
  if (count < 2) throw Error(ErrorKind::kInvalidInput, "resampling needs at least 2 output points");
  std::vector<double> cumulative(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cumulative[i] = cumulative[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = cumulative.back();

  std::vector<Vec2> out;
  out.reserve(count);
  out.push_back(pts.front());
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 1 < pts.size() && cumulative[seg] < s) ++seg;
    if (pts.size() == 1) {
      out.push_back(pts.front());
      continue;
    }
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double t = len > 0.0 ? std::clamp((s - cumulative[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(pts[seg - 1] + t * (pts[seg] - pts[seg - 1]));
  }
  out.push_back(pts.back());
  return out;
}

inline Trajectory resample(const Trajectory& traj, std::size_t count) {
  return Trajectory{traj.frame, resample_by_arc_length(traj.points, count)};
}

}  // namespace navsup
