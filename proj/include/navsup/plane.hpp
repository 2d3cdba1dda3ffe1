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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "navsup/camera.hpp"
#include "navsup/common.hpp"

namespace navsup {

// Plane normal . x + offset = 0, with the normal pointing toward the cameras.
struct NavigationPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  void validate() const {
    if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-9 || !std::isfinite(offset)) {
      throw Error(ErrorKind::kInvalidInput, "navigation plane normal must be a finite unit vector");
    }
  }

  NavigationPlane flipped() const { return NavigationPlane{-normal, -offset}; }
};

inline double signed_height(const Vec3& point, const NavigationPlane& plane) {
  return plane.normal.dot(point) + plane.offset;
}

// Orthonormal in-plane frame: first axis is world x projected onto the plane (world y when x is
// nearly parallel to the normal), second axis is normal x first.
struct PlaneBasis {
  Vec3 origin = Vec3::Zero();  // foot of the perpendicular from the world origin
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();

  static PlaneBasis of(const NavigationPlane& plane) {
    PlaneBasis b;
    b.normal = plane.normal;
    b.origin = -plane.offset * plane.normal;
    Vec3 seed = Vec3::UnitX();
    if (std::abs(seed.dot(plane.normal)) > 0.9) seed = Vec3::UnitY();
    b.axis_u = (seed - seed.dot(plane.normal) * plane.normal).normalized();
    b.axis_v = plane.normal.cross(b.axis_u);
    return b;
  }

  Vec2 coordinates(const Vec3& point) const {
    const Vec3 rel = point - origin;
    return Vec2(rel.dot(axis_u), rel.dot(axis_v));
  }

  // Point on the plane (or at `height` above it) with the given planar coordinates.
  Vec3 lift(const Vec2& planar, double height = 0.0) const {
    return origin + planar.x() * axis_u + planar.y() * axis_v + height * normal;
  }
};

inline Vec2 plane_coordinates(const Vec3& point, const NavigationPlane& plane) {
  return PlaneBasis::of(plane).coordinates(point);
}

struct PlaneRansacParams {
  int iterations = 512;
  double inlier_threshold = 0.02;  // meters
  std::uint64_t seed = 0;
  // Hypotheses are scored on a deterministic stride subsample of at most this many points.
  std::size_t max_scoring_points = 50000;
};

struct PlaneFit {
  NavigationPlane plane;
  std::size_t hypothesis_inliers = 0;  // best sampled hypothesis, on the scoring set
  std::size_t refit_inliers = 0;       // full cloud, after least-squares refit
};

namespace detail {

inline bool plane_through(const Vec3& a, const Vec3& b, const Vec3& c, NavigationPlane& out) {
  const Vec3 n = (b - a).cross(c - a);
  const double scale = (b - a).norm() * (c - a).norm();
  if (!(scale > 0.0) || n.norm() <= 1e-9 * scale) return false;
  out.normal = n.normalized();
  out.offset = -out.normal.dot(a);
  return true;
}

inline std::size_t count_inliers(std::span<const Vec3> pts, const NavigationPlane& plane, double threshold) {
  std::size_t n = 0;
  for (const auto& p : pts) {
    if (std::abs(signed_height(p, plane)) <= threshold) ++n;
  }
  return n;
}

// Total least squares plane through the given points.
inline NavigationPlane least_squares_plane(std::span<const Vec3> pts) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  NavigationPlane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(centroid);
  return plane;
}

inline NavigationPlane orient_toward(NavigationPlane plane, std::span<const Vec3> camera_origins) {
  if (camera_origins.empty()) {
    if (plane.normal.z() < 0.0) plane = plane.flipped();
    return plane;
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& c : camera_origins) mean += c;
  mean /= static_cast<double>(camera_origins.size());
  if (signed_height(mean, plane) < 0.0) plane = plane.flipped();
  return plane;
}

}  // namespace detail

// RANSAC over 3-point hypotheses, then a least-squares refit on the inliers of the best one.
// When the hypothesis budget covers every point triple, all triples are enumerated instead of sampled.
inline PlaneFit fit_plane_ransac(const PointCloud& cloud, const PlaneRansacParams& params = {},
                                 std::span<const Vec3> camera_origins = {}) {
  if (cloud.size() < 3) throw Error(ErrorKind::kFitFailure, "plane fit needs at least 3 points");
  if (params.iterations <= 0 || !(params.inlier_threshold > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "plane fit parameters must be positive");
  }

  std::vector<Vec3> scoring;
  const std::size_t n_all = cloud.size();
  if (params.max_scoring_points > 0 && n_all > params.max_scoring_points) {
    const std::size_t stride = (n_all + params.max_scoring_points - 1) / params.max_scoring_points;
    scoring.reserve(n_all / stride + 1);
    for (std::size_t i = 0; i < n_all; i += stride) scoring.push_back(cloud.points[i]);
  } else {
    scoring = cloud.points;
  }
  const std::size_t n = scoring.size();

  NavigationPlane best;
  std::size_t best_count = 0;
  bool found = false;
  auto consider = [&](std::size_t i, std::size_t j, std::size_t k) {
    NavigationPlane candidate;
    if (!detail::plane_through(scoring[i], scoring[j], scoring[k], candidate)) return;
    const std::size_t count = detail::count_inliers(scoring, candidate, params.inlier_threshold);
    if (!found || count > best_count) {
      best = candidate;
      best_count = count;
      found = true;
    }
  };

  const double triples = static_cast<double>(n) * (n - 1) * (n - 2) / 6.0;
  if (triples <= params.iterations) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) consider(i, j, k);
  } else {
    std::mt19937_64 rng(params.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int it = 0; it < params.iterations; ++it) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      std::size_t k = pick(rng);
      if (i == j || j == k || i == k) continue;
      consider(i, j, k);
    }
  }
  if (!found) throw Error(ErrorKind::kFitFailure, "all plane hypotheses were degenerate");

  std::vector<Vec3> inliers;
  for (const auto& p : cloud.points) {
    if (std::abs(signed_height(p, best)) <= params.inlier_threshold) inliers.push_back(p);
  }
  NavigationPlane refined = best;
  if (inliers.size() >= 3) {
    refined = detail::least_squares_plane(inliers);
  }

  PlaneFit fit;
  fit.plane = detail::orient_toward(refined, camera_origins);
  fit.hypothesis_inliers = best_count;
  fit.refit_inliers = detail::count_inliers(cloud.points, fit.plane, params.inlier_threshold);
  return fit;
}

}  // namespace navsup
