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

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "navsup/common.hpp"

namespace navsup {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorKind::kInvalidInput, "focal lengths must be positive");
    if (width <= 0 || height <= 0) throw Error(ErrorKind::kInvalidInput, "image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
      throw Error(ErrorKind::kInvalidInput, "principal point outside the image");
    }
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  // Camera-frame ray through pixel (u, v) with unit z component.
  Vec3 ray(double u, double v) const { return Vec3((u - cx) / fx, (v - cy) / fy, 1.0); }
};

// Camera-to-world rigid transform.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const {
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho <= 1e-6) || !(std::abs(rotation.determinant() - 1.0) <= 1e-6)) {
      throw Error(ErrorKind::kInvalidInput, "pose rotation is not a proper rotation");
    }
    if (!translation.allFinite()) throw Error(ErrorKind::kInvalidInput, "pose translation not finite");
  }

  Vec3 to_world(const Vec3& camera_point) const { return rotation * camera_point + translation; }
  Vec3 to_camera(const Vec3& world_point) const { return rotation.transpose() * (world_point - translation); }
};

// z-depth (range along the optical axis), not ray length.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  DepthFrame() = default;
  DepthFrame(int w, int h)
      : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0), valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  bool is_valid(int u, int v) const {
    const auto i = index(u, v);
    return valid[i] != 0 && std::isfinite(depth[i]) && depth[i] > 0.0;
  }
  void set(int u, int v, double d) {
    const auto i = index(u, v);
    depth[i] = d;
    valid[i] = (std::isfinite(d) && d > 0.0) ? 1 : 0;
  }
};

using Rgb8 = std::array<std::uint8_t, 3>;

struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb8> pixels;

  ColorImage() = default;
  ColorImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, Rgb8{0, 0, 0}) {}

  const Rgb8& at(int u, int v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
  Rgb8& at(int u, int v) { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

enum class MaskKind { kTarget, kObstacle };

inline const char* to_string(MaskKind kind) { return kind == MaskKind::kTarget ? "target" : "obstacle"; }

struct LabeledMask {
  std::string frame_id;
  MaskKind kind = MaskKind::kTarget;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  std::string class_name;

  LabeledMask() = default;
  LabeledMask(std::string frame, MaskKind k, int w, int h)
      : frame_id(std::move(frame)), kind(k), width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  void set(int u, int v, bool on) { bits[static_cast<std::size_t>(v) * width + u] = on ? 1 : 0; }
};

struct CameraFrame {
  std::string id;
  CameraIntrinsics intrinsics;
  Pose pose;
  DepthFrame depth;
  ColorImage color;
  std::vector<LabeledMask> masks;

  void validate() const {
    intrinsics.validate();
    pose.validate();
    if (depth.width != intrinsics.width || depth.height != intrinsics.height) {
      throw Error(ErrorKind::kDimensionMismatch, "depth frame " + id + " does not match intrinsics");
    }
    if (depth.depth.size() != static_cast<std::size_t>(depth.width) * depth.height ||
        depth.valid.size() != depth.depth.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "depth buffer size inconsistent in frame " + id);
    }
    if (!color.pixels.empty() && (color.width != depth.width || color.height != depth.height)) {
      throw Error(ErrorKind::kDimensionMismatch, "color image " + id + " does not match depth");
    }
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> colors;  // RGB in [0, 255]
  std::vector<double> weights;
  std::string source;

  std::size_t size() const noexcept { return points.size(); }
  void reserve(std::size_t n) {
    points.reserve(n);
    colors.reserve(n);
    weights.reserve(n);
  }
  void push_back(const Vec3& p, const Vec3& rgb, double w) {
    points.push_back(p);
    colors.push_back(rgb);
    weights.push_back(w);
  }
  void append(const PointCloud& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
    colors.insert(colors.end(), other.colors.begin(), other.colors.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  }
};

// Maps an observation's z-depth (meters) to its fusion confidence (> 0).
using WeightPolicy = std::function<double(double)>;

inline double inverse_depth_weight(double depth) { return 1.0 / (1.0 + depth); }

inline Vec3 backproject_pixel(const CameraFrame& frame, double u, double v, double depth) {
  return frame.pose.to_world(frame.intrinsics.ray(u, v) * depth);
}

// One world point per valid depth pixel. Pixel (u, v) refers to the pixel center at integer coordinates.
inline PointCloud backproject(const CameraFrame& frame, const WeightPolicy& weight = inverse_depth_weight) {
  frame.validate();
  PointCloud cloud;
  cloud.source = frame.id;
  const auto& d = frame.depth;
  cloud.reserve(d.depth.size());
  const bool has_color = !frame.color.pixels.empty();
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      if (!d.is_valid(u, v)) continue;
      const double z = d.depth[d.index(u, v)];
      Vec3 rgb = Vec3::Zero();
      if (has_color) {
        const auto& px = frame.color.at(u, v);
        rgb = Vec3(px[0], px[1], px[2]);
      }
      const double w = weight(z);
      if (!(w > 0.0)) throw Error(ErrorKind::kInvalidInput, "weight policy produced a non-positive weight");
      cloud.push_back(backproject_pixel(frame, u, v, z), rgb, w);
    }
  }
  return cloud;
}

struct ImageProjection {
  Vec2 pixel = Vec2::Zero();
  double camera_depth = 0.0;
  bool behind_camera = false;
};

inline ImageProjection project_to_image(const Vec3& world_point, const CameraIntrinsics& intrinsics,
                                        const Pose& pose) {
  ImageProjection out;
  const Vec3 pc = pose.to_camera(world_point);
  out.camera_depth = pc.z();
  if (!(pc.z() > 0.0)) {
    out.behind_camera = true;
    return out;
  }
  out.pixel = Vec2(intrinsics.fx * pc.x() / pc.z() + intrinsics.cx, intrinsics.fy * pc.y() / pc.z() + intrinsics.cy);
  return out;
}

inline ImageProjection project_to_image(const Vec3& world_point, const CameraFrame& frame) {
  return project_to_image(world_point, frame.intrinsics, frame.pose);
}

// Rotation whose camera z axis looks from `eye` toward `target`, with image y pointing as close to `down` as possible.
inline Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& down = Vec3(0, 0, -1)) {
  const Vec3 z = (target - eye).normalized();
  Vec3 y = down - down.dot(z) * z;
  if (y.norm() < 1e-9) {
    // Looking along `down`; pick any perpendicular.
    y = (std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
    y = (y - y.dot(z) * z);
  }
  y.normalize();
  const Vec3 x = y.cross(z);
  Pose pose;
  pose.rotation.col(0) = x;
  pose.rotation.col(1) = y;
  pose.rotation.col(2) = z;
  pose.translation = eye;
  return pose;
}

}  // namespace navsup
