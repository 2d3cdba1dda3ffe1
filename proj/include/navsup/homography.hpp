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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "navsup/common.hpp"

namespace navsup {

struct Correspondence {
  Vec2 src = Vec2::Zero();
  Vec2 dst = Vec2::Zero();
};

struct Homography {
  Mat3 matrix = Mat3::Identity();
  std::size_t inlier_count = 0;
  double inlier_fraction = 0.0;

  static Homography from_matrix(const Mat3& m) {
    if (!m.allFinite() || std::abs(m(2, 2)) < 1e-15) {
      throw Error(ErrorKind::kInvalidInput, "homography cannot be normalized");
    }
    Homography h;
    h.matrix = m / m(2, 2);
    if (std::abs(h.matrix.determinant()) <= 1e-12) throw Error(ErrorKind::kInvalidInput, "homography is singular");
    return h;
  }

  Homography inverse() const {
    Homography inv = from_matrix(matrix.inverse());
    inv.inlier_count = inlier_count;
    inv.inlier_fraction = inlier_fraction;
    return inv;
  }
};

inline Vec2 apply_homography(const Mat3& h, const Vec2& p) {
  const Vec3 q = h * Vec3(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) < 1e-12) throw Error(ErrorKind::kAtInfinity, "point maps to the line at infinity");
  return q.head<2>() / q.z();
}

inline std::vector<Vec2> apply_homography(const Homography& h, std::span<const Vec2> points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(apply_homography(h.matrix, p));
  return out;
}

struct ImageSize {
  int width = 0;
  int height = 0;

  Vec2 center() const { return Vec2(0.5 * width, 0.5 * height); }
  double diagonal() const { return std::hypot(static_cast<double>(width), static_cast<double>(height)); }
};

struct HomographyParams {
  std::size_t max_features = 400;
  std::size_t min_inliers = 20;
  double inlier_threshold = 3.0;     // pixels
  double center_shift_limit = 0.35;  // fraction of the image diagonal
  int iterations = 2000;
  std::uint64_t seed = 0;
};

enum class HomographyGate { kInsufficientInliers, kCenterShift };

inline const char* to_string(HomographyGate gate) {
  return gate == HomographyGate::kInsufficientInliers ? "insufficient inliers" : "center shift";
}

struct HomographyRejection {
  HomographyGate gate = HomographyGate::kInsufficientInliers;
  std::size_t inlier_count = 0;
  double center_shift = 0.0;  // pixels; NaN when the center maps to infinity
  std::string detail;
};

// Exactly one of `homography` and `rejection` is set.
struct HomographyOutcome {
  std::optional<Homography> homography;
  std::optional<HomographyRejection> rejection;

  bool accepted() const { return homography.has_value(); }
};

namespace detail {

// Similarity that moves the centroid to the origin with mean distance sqrt(2).
inline Mat3 hartley_normalizer(std::span<const Vec2> pts) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean = 0.0;
  for (const auto& p : pts) mean += (p - c).norm();
  mean /= static_cast<double>(pts.size());
  const double s = mean > 0.0 ? std::sqrt(2.0) / mean : 1.0;
  Mat3 t;
  t << s, 0.0, -s * c.x(), 0.0, s, -s * c.y(), 0.0, 0.0, 1.0;
  return t;
}

// Normalized direct linear transform; returns nullopt for degenerate configurations.
inline std::optional<Mat3> dlt_homography(std::span<const Vec2> src, std::span<const Vec2> dst) {
  const std::size_t n = src.size();
  if (n < 4) return std::nullopt;
  const Mat3 ts = hartley_normalizer(src);
  const Mat3 td = hartley_normalizer(dst);
  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = ts * Vec3(src[i].x(), src[i].y(), 1.0);
    const Vec3 q = td * Vec3(dst[i].x(), dst[i].y(), 1.0);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u;
    a.row(2 * i + 1) << 0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A rank below 8 means the null space is not a single homography.
  if (sv.size() >= 8 && sv(7) <= 1e-10 * sv(0)) return std::nullopt;
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Mat3 out = td.inverse() * hn * ts;
  if (!out.allFinite() || std::abs(out(2, 2)) < 1e-15) return std::nullopt;
  const Mat3 normalized = out / out(2, 2);
  if (std::abs(normalized.determinant()) <= 1e-12) return std::nullopt;
  return normalized;
}

inline double transfer_error(const Mat3& h, const Correspondence& m) {
  const Vec3 q = h * Vec3(m.src.x(), m.src.y(), 1.0);
  if (std::abs(q.z()) < 1e-12) return kInf;
  return (q.head<2>() / q.z() - m.dst).norm();
}

inline bool has_collinear_triple(std::span<const Vec2> pts) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const Vec2 a = pts[j] - pts[i];
        const Vec2 b = pts[k] - pts[i];
        const double cross = a.x() * b.y() - a.y() * b.x();
        if (std::abs(cross) <= 1e-9 * std::max(1.0, a.norm() * b.norm())) return true;
      }
  return false;
}

}  // namespace detail

// RANSAC over 4-point samples, normalized-DLT refit on the inliers, then the two acceptance gates.
inline HomographyOutcome fit_homography_ransac(std::span<const Correspondence> all_matches, ImageSize image,
                                               const HomographyParams& params = {}) {
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorKind::kInvalidInput, "image size must be positive");
  const std::size_t n = std::min(all_matches.size(), params.max_features);
  if (n < 4) throw Error(ErrorKind::kFitFailure, "homography fit needs at least 4 matches");
  const auto matches = all_matches.first(n);
  for (const auto& m : matches) {
    if (!m.src.allFinite() || !m.dst.allFinite()) throw Error(ErrorKind::kInvalidInput, "non-finite correspondence");
  }

  auto inliers_of = [&](const Mat3& h, double* residual_sum) {
    std::vector<std::size_t> idx;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = detail::transfer_error(h, matches[i]);
      if (e <= params.inlier_threshold) {
        idx.push_back(i);
        sum += e;
      }
    }
    if (residual_sum) *residual_sum = sum;
    return idx;
  };

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::optional<Mat3> best;
  std::size_t best_count = 0;
  double best_residual = kInf;
  for (int it = 0; it < params.iterations; ++it) {
    std::size_t s[4];
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        s[k] = pick(rng);
        fresh = std::none_of(s, s + k, [&](std::size_t prev) { return prev == s[k]; });
      } while (!fresh);
    }
    Vec2 src[4], dst[4];
    for (int k = 0; k < 4; ++k) {
      src[k] = matches[s[k]].src;
      dst[k] = matches[s[k]].dst;
    }
    if (detail::has_collinear_triple(src) || detail::has_collinear_triple(dst)) continue;
    const auto h = detail::dlt_homography(src, dst);
    if (!h) continue;
    double residual = 0.0;
    const auto idx = inliers_of(*h, &residual);
    if (!best || idx.size() > best_count || (idx.size() == best_count && residual < best_residual)) {
      best = h;
      best_count = idx.size();
      best_residual = residual;
    }
  }
  if (!best) throw Error(ErrorKind::kFitFailure, "all homography samples were degenerate");

  // Refit on the consensus set until it stops changing.
  Mat3 h = *best;
  std::vector<std::size_t> inliers = inliers_of(h, nullptr);
  for (int round = 0; round < 5 && inliers.size() >= 4; ++round) {
    std::vector<Vec2> src, dst;
    for (auto i : inliers) {
      src.push_back(matches[i].src);
      dst.push_back(matches[i].dst);
    }
    const auto refit = detail::dlt_homography(src, dst);
    if (!refit) break;
    auto next = inliers_of(*refit, nullptr);
    if (next.size() < inliers.size()) break;
    const bool same = next == inliers;
    h = *refit;
    inliers = std::move(next);
    if (same) break;
  }

  HomographyOutcome out;
  const std::size_t count = inliers.size();
  if (count < params.min_inliers) {
    out.rejection = HomographyRejection{HomographyGate::kInsufficientInliers, count, 0.0,
                                        std::to_string(count) + " inliers, need " + std::to_string(params.min_inliers)};
    return out;
  }
  const Vec2 c = image.center();
  const Vec3 q = h * Vec3(c.x(), c.y(), 1.0);
  const double limit = params.center_shift_limit * image.diagonal();
  const double shift = std::abs(q.z()) < 1e-12 ? std::numeric_limits<double>::quiet_NaN()
                                               : (q.head<2>() / q.z() - c).norm();
  if (!(shift <= limit)) {
    out.rejection = HomographyRejection{HomographyGate::kCenterShift, count, shift,
                                        "center moved " + std::to_string(shift) + " px, limit " +
                                            std::to_string(limit) + " px"};
    return out;
  }
  Homography result = Homography::from_matrix(h);
  result.inlier_count = count;
  result.inlier_fraction = static_cast<double>(count) / static_cast<double>(n);
  out.homography = result;
  return out;
}

}  // namespace navsup
