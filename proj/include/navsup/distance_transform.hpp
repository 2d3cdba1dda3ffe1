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
#include <vector>

#include "navsup/common.hpp"

namespace navsup {

// Marks cells with no blocked cell anywhere in the grid.
inline constexpr std::int64_t kNoSite = -1;

// Exact squared Euclidean distance (in cells) from every cell center to the nearest blocked cell
// center. Column pass computes 1D distances, row pass takes the lower envelope of parabolas.
// All arithmetic on squared distances is integral, so results match brute force exactly.
inline Grid2<std::int64_t> squared_distance_transform(const Grid2<std::uint8_t>& blocked) {
  const int rows = blocked.rows();
  const int cols = blocked.cols();
  Grid2<std::int64_t> out(rows, cols, kNoSite);
  if (rows == 0 || cols == 0) return out;

  // Vertical distance to the nearest blocked cell in the same column, or -1.
  Grid2<std::int64_t> vert(rows, cols, kNoSite);
  for (int c = 0; c < cols; ++c) {
    std::int64_t last = kNoSite;
    for (int r = 0; r < rows; ++r) {
      if (blocked(r, c)) last = r;
      if (last != kNoSite) vert(r, c) = r - last;
    }
    last = kNoSite;
    for (int r = rows - 1; r >= 0; --r) {
      if (blocked(r, c)) last = r;
      if (last != kNoSite && (vert(r, c) == kNoSite || last - r < vert(r, c))) vert(r, c) = last - r;
    }
  }

  std::vector<int> site(cols);
  std::vector<std::int64_t> f(cols);
  for (int r = 0; r < rows; ++r) {
    // Lower envelope over the columns that have a finite vertical distance.
    int k = -1;
    for (int q = 0; q < cols; ++q) {
      if (vert(r, q) == kNoSite) continue;
      const std::int64_t fq = vert(r, q) * vert(r, q);
      // Drop parabolas that the new one beats at their left boundary.
      while (k >= 0) {
        const int p = site[k];
        // Intersection of parabolas at p and q: s = ((fq + q^2) - (fp + p^2)) / (2(q - p)).
        // Compare against the intersection of site[k-1] and p using exact cross-multiplication.
        if (k == 0) break;
        const int pp = site[k - 1];
        const std::int64_t num_pq = (fq + std::int64_t(q) * q) - (f[k] + std::int64_t(p) * p);
        const std::int64_t den_pq = 2 * std::int64_t(q - p);
        const std::int64_t num_ppp = (f[k] + std::int64_t(p) * p) - (f[k - 1] + std::int64_t(pp) * pp);
        const std::int64_t den_ppp = 2 * std::int64_t(p - pp);
        // Parabola p is hidden when s(pp, p) >= s(p, q).
        if (num_ppp * den_pq >= num_pq * den_ppp) {
          --k;
        } else {
          break;
        }
      }
      ++k;
      site[k] = q;
      f[k] = fq;
    }
    if (k < 0) continue;
    int j = 0;
    for (int c = 0; c < cols; ++c) {
      auto value = [&](int idx) {
        const std::int64_t dx = c - site[idx];
        return f[idx] + dx * dx;
      };
      while (j < k && value(j + 1) <= value(j)) ++j;
      out(r, c) = value(j);
    }
  }
  return out;
}

// Distances in meters; +inf everywhere when no cell is blocked.
inline Grid2<double> distance_transform(const Grid2<std::uint8_t>& blocked, double resolution) {
  const auto sq = squared_distance_transform(blocked);
  Grid2<double> out(blocked.rows(), blocked.cols(), kInf);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    if (sq[i] != kNoSite) out[i] = std::sqrt(static_cast<double>(sq[i])) * resolution;
  }
  return out;
}

}  // namespace navsup
