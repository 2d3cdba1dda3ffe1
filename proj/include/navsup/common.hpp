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

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace navsup {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Failure categories. The CLI maps these onto its exit-code taxonomy.
enum class ErrorKind {
  kInvalidInput,
  kDimensionMismatch,
  kParse,
  kIo,
  kFitFailure,
  kAtInfinity,
  kNoTraversableSpace,
  kStartBlocked,
  kGoalUnreachable,
  kBehindCamera,
  kInternalConsistency,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kFitFailure: return "fit failure";
    case ErrorKind::kAtInfinity: return "point at infinity";
    case ErrorKind::kNoTraversableSpace: return "no traversable space";
    case ErrorKind::kStartBlocked: return "start blocked";
    case ErrorKind::kGoalUnreachable: return "goal unreachable";
    case ErrorKind::kBehindCamera: return "behind camera";
    case ErrorKind::kInternalConsistency: return "internal consistency";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {})
      : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  // Returns a copy tagged with the pipeline stage that raised it.
  Error with_stage(std::string stage) const { return Error(kind_, what(), std::move(stage)); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Dense row-major 2D array.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw Error(ErrorKind::kInvalidInput, "negative grid dimensions");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  bool contains(int r, int c) const noexcept { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }
  bool contains(Cell cell) const noexcept { return contains(cell.row, cell.col); }

  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }
  std::size_t index(Cell cell) const noexcept { return index(cell.row, cell.col); }
  Cell cell(std::size_t idx) const noexcept {
    return Cell{static_cast<int>(idx / static_cast<std::size_t>(cols_)),
                static_cast<int>(idx % static_cast<std::size_t>(cols_))};
  }

  T& operator()(int r, int c) noexcept { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const noexcept { return data_[index(r, c)]; }
  T& operator[](Cell cell) noexcept { return data_[index(cell)]; }
  const T& operator[](Cell cell) const noexcept { return data_[index(cell)]; }
  T& operator[](std::size_t idx) noexcept { return data_[idx]; }
  const T& operator[](std::size_t idx) const noexcept { return data_[idx]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid2&, const Grid2&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// The 8-neighborhood, in row-major order of the offsets.
inline constexpr int kNeighbor8[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                         {0, 1},   {1, -1}, {1, 0},  {1, 1}};

// 64-bit FNV-1a. Used for stable parameter hashes in run logs.
inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace navsup
