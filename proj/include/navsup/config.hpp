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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "navsup/bev.hpp"
#include "navsup/common.hpp"
#include "navsup/costmap.hpp"
#include "navsup/fmm.hpp"
#include "navsup/homography.hpp"
#include "navsup/plane.hpp"
#include "navsup/supervision.hpp"

namespace navsup {

// Every tunable of the pipeline. Defaults are the per-module defaults.
struct RunConfig {
  double resolution = 0.005;  // meters per BEV cell
  double grid_padding = 0.5;  // meters around the first frame's footprint
  HeightBand band;
  std::uint32_t min_support = 3;         // target evidence per cell
  std::uint32_t obstacle_threshold = 3;  // obstacle evidence per cell
  CostParams cost;
  PlaneRansacParams plane;
  SmoothingParams smoothing;
  HomographyParams homography;
  LossParams loss;
  std::size_t eval_resample = 16;  // 0 disables resampling in eval

  void validate() const {
    if (!(resolution > 0.0)) throw Error(ErrorKind::kInvalidInput, "resolution must be > 0");
    if (!(grid_padding >= 0.0)) throw Error(ErrorKind::kInvalidInput, "grid_padding must be >= 0");
    band.validate();
    cost.validate();
    loss.validate();
    if (plane.iterations <= 0 || !(plane.inlier_threshold > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "plane RANSAC parameters must be positive");
    }
    if (smoothing.window < 1 || smoothing.window % 2 == 0) throw Error(ErrorKind::kInvalidInput, "smoothing_window must be odd");
    if (smoothing.num_waypoints < 2) throw Error(ErrorKind::kInvalidInput, "num_waypoints must be >= 2");
    if (homography.iterations <= 0 || !(homography.inlier_threshold > 0.0) || homography.max_features < 4 ||
        !(homography.center_shift_limit > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "homography parameters out of range");
    }
    if (eval_resample == 1) throw Error(ErrorKind::kInvalidInput, "eval_resample must be 0 or >= 2");
  }
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, "config key '" + key + "': expected a number, got '" + text + "'");
  }
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kParse, "config key '" + key + "': expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

template <typename Field>
ConfigKey key(std::string name, std::string help, Field RunConfig::*outer) {
  return ConfigKey{name, std::move(help),
                   [outer](const RunConfig& c) {
                     if constexpr (std::is_floating_point_v<Field>) return fmt_num(c.*outer);
                     else return std::to_string(c.*outer);
                   },
                   [outer, name](RunConfig& c, const std::string& text) {
                     if constexpr (std::is_floating_point_v<Field>) c.*outer = parse_double(name, text);
                     else c.*outer = parse_int<Field>(name, text);
                   }};
}

template <typename Sub, typename Field>
ConfigKey key(std::string name, std::string help, Sub RunConfig::*outer, Field Sub::*inner) {
  return ConfigKey{name, std::move(help),
                   [outer, inner](const RunConfig& c) {
                     if constexpr (std::is_floating_point_v<Field>) return fmt_num(c.*outer.*inner);
                     else return std::to_string(c.*outer.*inner);
                   },
                   [outer, inner, name](RunConfig& c, const std::string& text) {
                     if constexpr (std::is_floating_point_v<Field>) (c.*outer).*inner = parse_double(name, text);
                     else (c.*outer).*inner = parse_int<Field>(name, text);
                   }};
}

}  // namespace detail

inline const std::vector<ConfigKey>& config_keys() {
  using detail::key;
  static const std::vector<ConfigKey> keys = {
      key("resolution", "BEV cell size (m)", &RunConfig::resolution),
      key("grid_padding", "padding around the first frame's footprint (m)", &RunConfig::grid_padding),
      key("band_low", "lowest retained height above the plane (m)", &RunConfig::band, &HeightBand::low),
      key("band_high", "highest retained height above the plane (m)", &RunConfig::band, &HeightBand::high),
      key("min_support", "target evidence needed per cell", &RunConfig::min_support),
      key("obstacle_threshold", "obstacle evidence that blocks a cell", &RunConfig::obstacle_threshold),
      key("safety_margin", "inflation radius around blocked cells (m)", &RunConfig::cost, &CostParams::safety_margin),
      key("penalty_radius", "reach of the near-obstacle cost ramp (m)", &RunConfig::cost, &CostParams::penalty_radius),
      key("penalty_gain", "extra cost at zero clearance", &RunConfig::cost, &CostParams::penalty_gain),
      key("plane_iterations", "plane RANSAC hypotheses", &RunConfig::plane, &PlaneRansacParams::iterations),
      key("plane_threshold", "plane inlier distance (m)", &RunConfig::plane, &PlaneRansacParams::inlier_threshold),
      key("plane_seed", "plane RANSAC seed", &RunConfig::plane, &PlaneRansacParams::seed),
      key("plane_max_points", "plane hypothesis scoring subsample size", &RunConfig::plane,
          &PlaneRansacParams::max_scoring_points),
      key("smoothing_window", "moving-average window (odd)", &RunConfig::smoothing, &SmoothingParams::window),
      key("num_waypoints", "waypoints per trajectory", &RunConfig::smoothing, &SmoothingParams::num_waypoints),
      key("homography_max_features", "matches kept for the homography fit", &RunConfig::homography,
          &HomographyParams::max_features),
      key("homography_min_inliers", "inliers required to accept a homography", &RunConfig::homography,
          &HomographyParams::min_inliers),
      key("homography_threshold", "homography inlier transfer error (px)", &RunConfig::homography,
          &HomographyParams::inlier_threshold),
      key("homography_center_shift", "max image-center shift (fraction of diagonal)", &RunConfig::homography,
          &HomographyParams::center_shift_limit),
      key("homography_iterations", "homography RANSAC samples", &RunConfig::homography, &HomographyParams::iterations),
      key("homography_seed", "homography RANSAC seed", &RunConfig::homography, &HomographyParams::seed),
      key("lambda_d", "direction term weight", &RunConfig::loss, &LossParams::lambda_d),
      key("loss_epsilon", "degenerate segment length", &RunConfig::loss, &LossParams::epsilon),
      key("eval_resample", "points per trajectory before scoring (0 = none)", &RunConfig::eval_resample),
  };
  return keys;
}

inline void set_config_value(RunConfig& cfg, const std::string& name, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == name) {
      k.set(cfg, value);
      return;
    }
  }
  throw Error(ErrorKind::kParse, "unknown config key '" + name + "'");
}

// Key-value text: one "key = value" per line, '#' comments, unknown keys rejected.
inline void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& name = "config") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kParse, name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// Canonical "key = value" listing in table order; also the input format.
inline std::string config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

inline std::string config_hash(const RunConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_text(cfg))));
  return buf;
}

}  // namespace navsup
