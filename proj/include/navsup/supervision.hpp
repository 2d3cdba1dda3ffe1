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
#include <span>
#include <string>
#include <vector>

#include "navsup/common.hpp"
#include "navsup/trajectory.hpp"

namespace navsup {

struct LossParams {
  double lambda_d = 0.5;  // weight of the segment-direction term
  double epsilon = 1e-8;  // segments shorter than this carry no direction cost

  void validate() const {
    if (!(lambda_d >= 0.0)) throw Error(ErrorKind::kInvalidInput, "lambda_d must be >= 0");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidInput, "epsilon must be > 0");
  }
};

struct LossTerms {
  double regression = 0.0;
  double direction = 0.0;  // already scaled by lambda_d / T

  double total() const { return regression + direction; }
};

// Per-waypoint L2 regression plus a segment-direction consistency term. Segments are anchored at
// the shared start point, so the first segment of each sequence runs from `start` to waypoint 1.
inline LossTerms hypothesis_loss_terms(std::span<const Vec2> pred, const Vec2& start, std::span<const Vec2> target,
                                       const LossParams& params = {}) {
  params.validate();
  if (pred.empty() || target.empty()) throw Error(ErrorKind::kInvalidInput, "loss of an empty sequence");
  if (pred.size() != target.size()) throw Error(ErrorKind::kDimensionMismatch, "loss requires equal lengths");
  const double t_count = static_cast<double>(pred.size());
  double reg = 0.0;
  double dir = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    reg += (pred[t] - target[t]).norm();
    const Vec2 dp = pred[t] - (t == 0 ? start : pred[t - 1]);
    const Vec2 dy = target[t] - (t == 0 ? start : target[t - 1]);
    const double np2 = dp.squaredNorm();
    const double ny2 = dy.squaredNorm();
    if (np2 < params.epsilon * params.epsilon || ny2 < params.epsilon * params.epsilon) continue;
    // sqrt of the product keeps cos exactly +-1 for equal or opposite segments.
    dir += 1.0 - std::clamp(dp.dot(dy) / std::sqrt(np2 * ny2), -1.0, 1.0);
  }
  return LossTerms{reg / t_count, params.lambda_d * dir / t_count};
}

inline double hypothesis_loss(std::span<const Vec2> pred, const Vec2& start, std::span<const Vec2> target,
                              const LossParams& params = {}) {
  return hypothesis_loss_terms(pred, start, target, params).total();
}

// K candidate trajectories with normalized confidences and a shared start point.
struct HypothesisSet {
  std::vector<std::vector<Vec2>> trajectories;
  std::vector<double> confidences;
  Vec2 start = Vec2::Zero();

  std::size_t size() const noexcept { return trajectories.size(); }

  void validate() const {
    if (trajectories.empty()) throw Error(ErrorKind::kInvalidInput, "hypothesis set is empty");
    if (confidences.size() != trajectories.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "one confidence per hypothesis required");
    }
    const std::size_t len = trajectories.front().size();
    double sum = 0.0;
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      if (trajectories[k].size() != len || len == 0) {
        throw Error(ErrorKind::kDimensionMismatch, "hypotheses must share a nonzero length");
      }
      if (!(confidences[k] > 0.0)) throw Error(ErrorKind::kInvalidInput, "confidences must be positive");
      sum += confidences[k];
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error(ErrorKind::kInvalidInput, "confidences must sum to 1");
  }
};

struct Sample {
  HypothesisSet hypotheses;
  std::vector<Vec2> target;
};

// Mean over the batch of the best hypothesis loss per sample.
inline double best_of_k_loss(std::span<const Sample> batch, const LossParams& params = {}) {
  if (batch.empty()) throw Error(ErrorKind::kInvalidInput, "empty batch");
  double sum = 0.0;
  for (const auto& s : batch) {
    if (s.hypotheses.trajectories.empty()) throw Error(ErrorKind::kInvalidInput, "sample without hypotheses");
    double best = kInf;
    for (const auto& h : s.hypotheses.trajectories) {
      best = std::min(best, hypothesis_loss(h, s.hypotheses.start, s.target, params));
    }
    sum += best;
  }
  return sum / static_cast<double>(batch.size());
}

// Index of the most confident hypothesis; the lowest index wins ties.
inline std::size_t select_final_index(const HypothesisSet& h) {
  h.validate();
  std::size_t best = 0;
  for (std::size_t k = 1; k < h.confidences.size(); ++k) {
    if (h.confidences[k] > h.confidences[best]) best = k;
  }
  return best;
}

inline const std::vector<Vec2>& select_final(const HypothesisSet& h) { return h.trajectories[select_final_index(h)]; }

enum class Tier { kUsable, kBorderline, kReject };
enum class LabelSource { kGroundTruth, kTeacher };

inline const char* to_string(Tier t) {
  switch (t) {
    case Tier::kUsable: return "usable";
    case Tier::kBorderline: return "borderline";
    case Tier::kReject: return "reject";
  }
  return "?";
}
inline const char* to_string(LabelSource s) { return s == LabelSource::kGroundTruth ? "ground_truth" : "teacher"; }

inline Tier tier_from_string(const std::string& s) {
  if (s == "usable") return Tier::kUsable;
  if (s == "borderline") return Tier::kBorderline;
  if (s == "reject") return Tier::kReject;
  throw Error(ErrorKind::kParse, "unknown tier '" + s + "'");
}
inline LabelSource source_from_string(const std::string& s) {
  if (s == "ground_truth") return LabelSource::kGroundTruth;
  if (s == "teacher") return LabelSource::kTeacher;
  throw Error(ErrorKind::kParse, "unknown label source '" + s + "'");
}

struct PseudoLabel {
  std::string scene_id;
  Trajectory trajectory;
  Tier tier = Tier::kUsable;
  LabelSource source = LabelSource::kTeacher;
};

// The four supervision compositions compared in the training ablation.
enum class Composition { kGtOnly, kWmOnlyUsableBorderline, kGtPlusUsable, kGtPlusUsableBorderline };

inline const char* to_string(Composition c) {
  switch (c) {
    case Composition::kGtOnly: return "gt_only";
    case Composition::kWmOnlyUsableBorderline: return "wm_only_usable_borderline";
    case Composition::kGtPlusUsable: return "gt_plus_usable";
    case Composition::kGtPlusUsableBorderline: return "gt_plus_usable_borderline";
  }
  return "?";
}

inline Composition composition_from_string(const std::string& s) {
  for (auto c : {Composition::kGtOnly, Composition::kWmOnlyUsableBorderline, Composition::kGtPlusUsable,
                 Composition::kGtPlusUsableBorderline}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorKind::kInvalidInput, "unknown composition mode '" + s + "'");
}

// Filtered union of ground-truth and teacher labels. Reject-tier labels never pass. Output is sorted
// by scene id, then source (ground truth first); input order is kept among equal keys.
inline std::vector<PseudoLabel> compose_training_set(std::span<const PseudoLabel> gt, std::span<const PseudoLabel> wm,
                                                     Composition mode) {
  const bool take_gt = mode != Composition::kWmOnlyUsableBorderline;
  const bool take_wm = mode != Composition::kGtOnly;
  const bool take_borderline = mode == Composition::kWmOnlyUsableBorderline ||
                               mode == Composition::kGtPlusUsableBorderline;
  std::vector<PseudoLabel> out;
  if (take_gt) {
    for (const auto& l : gt) {
      if (l.tier != Tier::kReject) out.push_back(l);
    }
  }
  if (take_wm) {
    for (const auto& l : wm) {
      if (l.tier == Tier::kUsable || (take_borderline && l.tier == Tier::kBorderline)) out.push_back(l);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const PseudoLabel& a, const PseudoLabel& b) {
    if (a.scene_id != b.scene_id) return a.scene_id < b.scene_id;
    return static_cast<int>(a.source) < static_cast<int>(b.source);
  });
  return out;
}

}  // namespace navsup
