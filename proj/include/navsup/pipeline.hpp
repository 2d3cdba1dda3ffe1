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

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "navsup/bev.hpp"
#include "navsup/camera.hpp"
#include "navsup/config.hpp"
#include "navsup/costmap.hpp"
#include "navsup/fmm.hpp"
#include "navsup/homography.hpp"
#include "navsup/io.hpp"
#include "navsup/metrics.hpp"
#include "navsup/plane.hpp"
#include "navsup/supervision.hpp"
#include "navsup/synth.hpp"

namespace navsup {

// Exit-code taxonomy shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPlanning = 3;
inline constexpr int kExitRejected = 4;

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
      return kExitInput;
    default:
      return kExitPlanning;
  }
}

// Renders every scripted pose of a synthetic scene into a bundle.
inline io::SceneBundle synthesize_bundle(const synth::SceneSpec& spec) {
  spec.validate();
  io::SceneBundle b;
  b.scene_id = spec.id;
  b.instruction = spec.instruction;
  b.start = spec.start;
  for (std::size_t i = 0; i < spec.poses.size(); ++i) b.frames.push_back(synth::render(spec, i));
  return b;
}

// Quantizes depth to whole millimeters, matching what a bundle looks like after a round trip through disk.
inline void quantize_depth_mm(io::SceneBundle& bundle) {
  for (auto& f : bundle.frames) {
    for (std::size_t i = 0; i < f.depth.depth.size(); ++i) {
      if (!f.depth.valid[i]) continue;
      const long mm = std::clamp(std::lround(f.depth.depth[i] * 1000.0), 0L, 65535L);
      f.depth.depth[i] = mm / 1000.0;
      f.depth.valid[i] = mm > 0 ? 1 : 0;
    }
  }
}

struct PlanResult {
  std::string scene_id;
  PlaneFit plane_fit;
  BevGrid grid;
  TargetRegion target;
  CostMap costmap;
  ArrivalField field;
  Cell start_cell;
  Cell goal;
  std::vector<Cell> path;
  Trajectory plane_trajectory;
  ImageTrajectory image_trajectory;
  io::json log = io::json::object();
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(io::json& timings) : timings_(timings) {}

  template <typename F>
  auto run(const std::string& stage, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto out = fn();
        record(stage, t0);
        return out;
      }
    } catch (const Error& e) {
      throw e.with_stage(stage);
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    timings_[stage] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  io::json& timings_;
};

}  // namespace detail

// Teacher pipeline: backproject, fit the plane, accumulate the BEV, rasterize masks, build the cost map,
// run FMM, pick the goal, extract, smooth and resample, and project into the first frame.
inline PlanResult plan_scene(const io::SceneBundle& bundle, const RunConfig& cfg) {
  cfg.validate();
  if (bundle.frames.empty()) throw Error(ErrorKind::kInvalidInput, "scene has no frames", "ingest");
  PlanResult res;
  res.scene_id = bundle.scene_id;
  io::json timings = io::json::object();
  detail::StageTimer timer(timings);

  std::vector<PointCloud> clouds = timer.run("backproject", [&] {
    std::vector<PointCloud> out;
    for (const auto& f : bundle.frames) out.push_back(backproject(f));
    return out;
  });

  res.plane_fit = timer.run("plane_fit", [&] {
    PointCloud all;
    for (const auto& c : clouds) all.append(c);
    std::vector<Vec3> origins;
    for (const auto& f : bundle.frames) origins.push_back(f.pose.translation);
    return fit_plane_ransac(all, cfg.plane, origins);
  });
  const NavigationPlane& plane = res.plane_fit.plane;
  const PlaneBasis basis = PlaneBasis::of(plane);

  io::json discards = io::json::array();
  timer.run("bev_accumulate", [&] {
    // Grid extent: start position and the in-band footprint of the first frame.
    Vec2 lo = bundle.start;
    Vec2 hi = bundle.start;
    for (const auto& p : clouds.front().points) {
      if (!cfg.band.contains(signed_height(p, plane))) continue;
      const Vec2 q = basis.coordinates(p);
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
    res.grid = BevGrid::covering(lo, hi, cfg.resolution, cfg.grid_padding);
    for (std::size_t i = 0; i < clouds.size(); ++i) {
      const auto stats = accumulate_frame(res.grid, clouds[i], plane, cfg.band);
      discards.push_back(io::json{{"frame", bundle.frames[i].id},
                                  {"accepted", stats.accepted},
                                  {"out_of_band", stats.out_of_band},
                                  {"out_of_grid", stats.out_of_grid}});
    }
  });
  clouds.clear();

  io::json mask_stats = io::json::array();
  timer.run("mask_rasterize", [&] {
    for (const auto& f : bundle.frames) {
      for (const auto& m : f.masks) {
        const auto stats = rasterize_mask(res.grid, m, f, plane, cfg.band);
        mask_stats.push_back(io::json{{"frame", f.id}, {"kind", to_string(m.kind)}, {"accepted", stats.accepted},
                                      {"out_of_band", stats.out_of_band}, {"out_of_grid", stats.out_of_grid}});
      }
    }
  });

  res.target = timer.run("target_consolidate", [&] {
    auto region = consolidate_target(res.grid, cfg.min_support);
    if (region.empty()) throw Error(ErrorKind::kGoalUnreachable, "no target evidence reaches min_support");
    return region;
  });

  res.costmap = timer.run("costmap", [&] { return build_costmap(res.grid, cfg.cost, cfg.obstacle_threshold); });

  res.field = timer.run("fmm", [&] {
    const auto cell = res.costmap.cell_of(bundle.start);
    if (!cell) throw Error(ErrorKind::kInvalidInput, "start position lies outside the grid");
    res.start_cell = *cell;
    return solve_eikonal(res.costmap, *cell);
  });

  res.goal = timer.run("goal_select", [&] { return select_goal(res.target, res.costmap, res.field); });
  res.path = timer.run("extract_path", [&] { return extract_path(res.field, res.goal); });
  res.plane_trajectory = timer.run("smooth_resample", [&] {
    return smooth_and_resample(res.path, res.costmap, cfg.smoothing);
  });
  res.image_trajectory = timer.run("project_image", [&] {
    return trajectory_to_image(res.plane_trajectory, bundle.frames.front(), plane);
  });

  std::size_t blocked_waypoints = 0;
  for (const auto& p : res.plane_trajectory.points) {
    const auto cell = res.costmap.cell_of(p);
    if (!cell || !res.costmap.is_free(*cell)) ++blocked_waypoints;
  }

  res.log = io::json{
      {"scene_id", bundle.scene_id},
      {"config_hash", config_hash(cfg)},
      {"timings_ms", timings},
      {"plane", io::json{{"normal", io::to_json(plane.normal)},
                         {"offset", plane.offset},
                         {"hypothesis_inliers", res.plane_fit.hypothesis_inliers},
                         {"refit_inliers", res.plane_fit.refit_inliers}}},
      {"grid", io::json{{"rows", res.grid.rows()},
                        {"cols", res.grid.cols()},
                        {"resolution", res.grid.resolution()},
                        {"origin", io::to_json(res.grid.origin())}}},
      {"discards", discards},
      {"masks", mask_stats},
      {"target_cells", res.target.cells.size()},
      {"target_centroid", io::to_json(res.target.centroid)},
      {"free_cells", res.costmap.free_count()},
      {"start_cell", io::json::array({res.start_cell.row, res.start_cell.col})},
      {"goal_cell", io::json::array({res.goal.row, res.goal.col})},
      {"goal_arrival", res.field.time[res.goal]},
      {"path_cells", res.path.size()},
      {"blocked_waypoints", blocked_waypoints},
      {"dropped_behind_camera", res.image_trajectory.dropped_behind_camera},
      {"status", "ok"},
  };
  return res;
}

inline io::json trajectory_provenance(const std::string& scene_id, const RunConfig& cfg) {
  return io::json{{"scene_id", scene_id}, {"config_hash", config_hash(cfg)}, {"generator", "navsup plan"}};
}

// Writes grids first and trajectories last, each through write-then-rename.
inline void write_plan_outputs(const io::fs::path& dir, const PlanResult& res, const RunConfig& cfg) {
  io::fs::create_directories(dir);
  io::write_bev_exports(dir, res.grid);
  io::write_atomic(dir / "costmap.txt", io::format_grid_dump(res.costmap.cost, res.costmap.resolution,
                                                             res.costmap.origin, "-1"));
  io::write_atomic(dir / "arrival.txt", io::format_grid_dump(res.field.time, res.costmap.resolution,
                                                             res.costmap.origin, "-1"));
  const auto prov = trajectory_provenance(res.scene_id, cfg);
  io::write_trajectory(dir / "trajectory_plane.json", io::TrajectoryRecord{res.scene_id, res.plane_trajectory, prov});
  io::write_trajectory(dir / "trajectory_image.json",
                       io::TrajectoryRecord{res.scene_id, res.image_trajectory.trajectory, prov});
}

// ---------------------------------------------------------------------------------------------
// Evaluation

struct EvalRow {
  std::string sample_id;
  MetricReport report;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by sample id
  MetricReport mean;
  std::size_t resample = 0;
};

inline EvalReport evaluate_records(const std::vector<io::TrajectoryRecord>& preds,
                                   const std::vector<io::TrajectoryRecord>& gts, std::size_t resample_count) {
  std::map<std::string, const io::TrajectoryRecord*> pred_by_id;
  std::map<std::string, const io::TrajectoryRecord*> gt_by_id;
  std::vector<std::string> problems;
  for (const auto& p : preds) {
    if (!pred_by_id.emplace(p.scene_id, &p).second) problems.push_back("duplicate prediction id '" + p.scene_id + "'");
  }
  for (const auto& g : gts) {
    if (!gt_by_id.emplace(g.scene_id, &g).second) problems.push_back("duplicate ground-truth id '" + g.scene_id + "'");
  }
  for (const auto& [id, _] : pred_by_id) {
    if (!gt_by_id.count(id)) problems.push_back("prediction '" + id + "' has no ground truth");
  }
  for (const auto& [id, _] : gt_by_id) {
    if (!pred_by_id.count(id)) problems.push_back("ground truth '" + id + "' has no prediction");
  }
  if (!problems.empty()) {
    std::string msg = "sample id mismatch:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::kParse, msg);
  }
  if (pred_by_id.empty()) throw Error(ErrorKind::kInvalidInput, "nothing to evaluate");

  EvalReport rep;
  rep.resample = resample_count;
  for (const auto& [id, pred] : pred_by_id) {
    const auto* gt = gt_by_id.at(id);
    const auto rc = resample_count ? std::optional<std::size_t>(resample_count) : std::nullopt;
    rep.rows.push_back(EvalRow{id, evaluate(pred->trajectory, gt->trajectory, rc)});
  }
  for (const auto& r : rep.rows) {
    rep.mean.ade += r.report.ade;
    rep.mean.fde += r.report.fde;
    rep.mean.dtw_norm += r.report.dtw_norm;
  }
  const double n = static_cast<double>(rep.rows.size());
  rep.mean.ade /= n;
  rep.mean.fde /= n;
  rep.mean.dtw_norm /= n;
  return rep;
}

inline std::string resample_policy(std::size_t resample) {
  return resample ? "arc-length resampling of both trajectories to " + std::to_string(resample) + " points"
                  : "none (equal lengths required)";
}

// Plain-text table: one row per sample, then the mean; columns ADE, FDE, DTW.
inline std::string format_eval_table(const EvalReport& rep) {
  std::ostringstream out;
  char buf[160];
  out << "# resample: " << resample_policy(rep.resample) << "\n";
  std::snprintf(buf, sizeof buf, "%-28s %12s %12s %12s\n", "sample", "ADE", "FDE", "DTW");
  out << buf;
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%-28s %12.4f %12.4f %12.4f\n", r.sample_id.c_str(), r.report.ade, r.report.fde,
                  r.report.dtw_norm);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-28s %12.4f %12.4f %12.4f\n", "mean", rep.mean.ade, rep.mean.fde, rep.mean.dtw_norm);
  out << buf;
  return out.str();
}

inline io::json eval_report_json(const EvalReport& rep) {
  io::json rows = io::json::array();
  for (const auto& r : rep.rows) {
    rows.push_back(io::json{{"sample_id", r.sample_id},
                            {"ade", r.report.ade},
                            {"fde", r.report.fde},
                            {"dtw", r.report.dtw_norm},
                            {"length_pred", r.report.length_pred},
                            {"length_gt", r.report.length_gt}});
  }
  return io::json{{"resample", resample_policy(rep.resample)},
                  {"columns", io::json::array({"ADE", "FDE", "DTW"})},
                  {"samples", rows},
                  {"mean", io::json{{"ade", rep.mean.ade}, {"fde", rep.mean.fde}, {"dtw", rep.mean.dtw_norm}}}};
}

// ---------------------------------------------------------------------------------------------
// Alignment

struct AlignResult {
  HomographyOutcome outcome;
  std::optional<Trajectory> transferred;
};

// Fits the gated homography and transfers an image-frame trajectory through it (or its inverse).
inline AlignResult align_trajectory(std::span<const Correspondence> matches, const Trajectory& traj, ImageSize image,
                                    const HomographyParams& params, bool inverse) {
  if (traj.frame != FrameTag::kImage) throw Error(ErrorKind::kInvalidInput, "alignment needs an image-frame trajectory");
  AlignResult res;
  res.outcome = fit_homography_ransac(matches, image, params);
  if (!res.outcome.accepted()) return res;
  const Homography h = inverse ? res.outcome.homography->inverse() : *res.outcome.homography;
  res.transferred = Trajectory{FrameTag::kImage, apply_homography(h, traj.points)};
  return res;
}

// ---------------------------------------------------------------------------------------------
// Training-set composition

inline io::json composition_summary(const std::vector<PseudoLabel>& labels, Composition mode) {
  io::json counts = io::json::object();
  for (auto src : {LabelSource::kGroundTruth, LabelSource::kTeacher}) {
    io::json per_tier = io::json::object();
    for (auto tier : {Tier::kUsable, Tier::kBorderline, Tier::kReject}) per_tier[to_string(tier)] = 0;
    counts[to_string(src)] = per_tier;
  }
  for (const auto& l : labels) counts[to_string(l.source)][to_string(l.tier)] = counts[to_string(l.source)][to_string(l.tier)].get<int>() + 1;
  return io::json{{"mode", to_string(mode)}, {"total", labels.size()}, {"counts", counts}};
}

}  // namespace navsup
