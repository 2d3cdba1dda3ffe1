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

// navsup: plan / eval / align / compose / synth / selftest.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navsup/navsup.hpp"

namespace {

namespace fs = std::filesystem;
using navsup::Error;
using navsup::ErrorKind;
using navsup::RunConfig;
using navsup::io::json;

// Config file first, then any per-key flags.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key = value config file");
    for (const auto& key : navsup::config_keys()) {
      cmd->add_option("--" + key.name, overrides[key.name], key.help + " (default " + key.get(RunConfig{}) + ")");
    }
  }

  RunConfig resolve(const CLI::App* cmd) const {
    RunConfig cfg;
    if (!config_file.empty()) navsup::apply_config_text(cfg, navsup::io::read_text(config_file), config_file);
    for (const auto& key : navsup::config_keys()) {
      if (cmd->count("--" + key.name) > 0) navsup::set_config_value(cfg, key.name, overrides.at(key.name));
    }
    cfg.validate();
    return cfg;
  }
};

int report_error(const Error& e) {
  std::cerr << "error";
  if (!e.stage().empty()) std::cerr << " [" << e.stage() << "]";
  std::cerr << " (" << navsup::to_string(e.kind()) << "): " << e.what() << "\n";
  return navsup::exit_code_for(e.kind());
}

int cmd_plan(const std::string& scene_dir, const std::string& out_dir, const RunConfig& cfg) {
  const fs::path out(out_dir);
  json log;
  try {
    const auto bundle = navsup::io::read_scene_bundle(scene_dir);
    const auto result = navsup::plan_scene(bundle, cfg);
    navsup::write_plan_outputs(out, result, cfg);
    log = result.log;
    navsup::io::write_atomic(out / "run_log.json", navsup::io::dump(log));
    std::cout << "planned " << result.scene_id << ": " << result.path.size() << " cells, "
              << result.plane_trajectory.size() << " waypoints -> " << out_dir << "\n";
    return navsup::kExitOk;
  } catch (const Error& e) {
    // No stale trajectories may survive a failed run.
    std::error_code ec;
    fs::remove(out / "trajectory_plane.json", ec);
    fs::remove(out / "trajectory_image.json", ec);
    log = json{{"status", "error"},
               {"stage", e.stage()},
               {"kind", navsup::to_string(e.kind())},
               {"message", e.what()},
               {"config_hash", navsup::config_hash(cfg)}};
    try {
      navsup::io::write_atomic(out / "run_log.json", navsup::io::dump(log));
    } catch (const Error&) {
    }
    return report_error(e);
  }
}

std::vector<navsup::io::TrajectoryRecord> read_records(const std::vector<std::string>& files) {
  std::vector<navsup::io::TrajectoryRecord> out;
  std::vector<std::string> problems;
  for (const auto& f : files) {
    try {
      out.push_back(navsup::io::read_trajectory(f));
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "unreadable trajectory file(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::kParse, msg);
  }
  return out;
}

int cmd_eval(const std::vector<std::string>& preds, const std::vector<std::string>& gts, const RunConfig& cfg,
             const std::string& out_path) {
  const auto report = navsup::evaluate_records(read_records(preds), read_records(gts), cfg.eval_resample);
  std::cout << navsup::format_eval_table(report);
  if (!out_path.empty()) navsup::io::write_atomic(out_path, navsup::io::dump(navsup::eval_report_json(report)));
  return navsup::kExitOk;
}

int cmd_align(const std::string& matches_path, const std::string& traj_path, int width, int height, bool inverse,
              const RunConfig& cfg, const std::string& out_path, const std::string& report_path) {
  const auto matches = navsup::io::parse_correspondences(navsup::io::read_text(matches_path), matches_path);
  const auto rec = navsup::io::read_trajectory(traj_path);
  const auto res = navsup::align_trajectory(matches, rec.trajectory, navsup::ImageSize{width, height}, cfg.homography,
                                            inverse);
  json report;
  if (!res.outcome.accepted()) {
    const auto& rej = *res.outcome.rejection;
    report = json{{"status", "rejected"},
                  {"gate", navsup::to_string(rej.gate)},
                  {"inlier_count", rej.inlier_count},
                  {"center_shift", rej.center_shift},
                  {"detail", rej.detail}};
    if (!report_path.empty()) navsup::io::write_atomic(report_path, navsup::io::dump(report));
    std::cout << navsup::io::dump(report);
    std::error_code ec;
    if (!out_path.empty()) fs::remove(out_path, ec);
    return navsup::kExitRejected;
  }
  const auto& h = *res.outcome.homography;
  json m = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.push_back(h.matrix(r, c));
  report = json{{"status", "accepted"},
                {"inlier_count", h.inlier_count},
                {"inlier_fraction", h.inlier_fraction},
                {"homography", m},
                {"direction", inverse ? "inverse" : "forward"}};
  navsup::io::TrajectoryRecord out_rec{rec.scene_id, *res.transferred, rec.provenance};
  out_rec.provenance["aligned"] = report;
  if (!out_path.empty()) {
    navsup::io::write_trajectory(out_path, out_rec);
  } else {
    std::cout << navsup::io::dump(navsup::io::to_json(out_rec));
  }
  if (!report_path.empty()) navsup::io::write_atomic(report_path, navsup::io::dump(report));
  return navsup::kExitOk;
}

int cmd_compose(const std::string& gt_path, const std::string& wm_path, const std::string& mode_name,
                const std::string& out_path, const std::string& summary_path) {
  const auto mode = navsup::composition_from_string(mode_name);
  const auto gt = navsup::io::parse_labels(navsup::io::read_text(gt_path), gt_path);
  const auto wm = navsup::io::parse_labels(navsup::io::read_text(wm_path), wm_path);
  const auto composed = navsup::compose_training_set(gt, wm, mode);
  navsup::io::write_atomic(out_path, navsup::io::format_labels(composed));
  const json summary = navsup::composition_summary(composed, mode);
  if (!summary_path.empty()) navsup::io::write_atomic(summary_path, navsup::io::dump(summary));
  std::cout << navsup::io::dump(summary);
  return navsup::kExitOk;
}

int cmd_synth(const std::string& preset, const std::string& spec_path, const std::string& out_dir, bool list) {
  if (list) {
    for (const auto& s : navsup::synth::scene_suite()) std::cout << s.id << "\n";
    std::cout << navsup::synth::walled_off_scene().id << "\n";
    return navsup::kExitOk;
  }
  navsup::synth::SceneSpec spec;
  if (!spec_path.empty()) {
    spec = navsup::io::scene_spec_from(navsup::io::parse_json(navsup::io::read_text(spec_path), spec_path), spec_path);
  } else {
    const auto found = navsup::synth::find_preset(preset);
    if (!found) throw Error(ErrorKind::kInvalidInput, "unknown preset '" + preset + "' (see --list)");
    spec = *found;
  }
  if (out_dir.empty()) throw Error(ErrorKind::kInvalidInput, "--out is required");
  navsup::io::write_scene_bundle(out_dir, navsup::synthesize_bundle(spec));
  navsup::io::write_atomic(fs::path(out_dir) / "scene_spec.json", navsup::io::dump(navsup::io::to_json(spec)));
  std::cout << "wrote scene " << spec.id << " (" << spec.poses.size() << " frames) to " << out_dir << "\n";
  return navsup::kExitOk;
}

// Checks that the CLI's effective defaults equal the per-module defaults.
int cmd_selftest() {
  const RunConfig cfg;
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };
  const navsup::HeightBand band;
  const navsup::CostParams cost;
  const navsup::PlaneRansacParams plane;
  const navsup::HomographyParams homography;
  const navsup::LossParams loss;
  const navsup::SmoothingParams smoothing;
  check("resolution = 0.005 m", cfg.resolution == 0.005);
  check("band = [-0.5, 1.5] m", cfg.band.low == band.low && cfg.band.high == band.high && band.low == -0.5 &&
                                    band.high == 1.5);
  check("cost params", cfg.cost.safety_margin == cost.safety_margin && cfg.cost.penalty_radius == cost.penalty_radius &&
                           cfg.cost.penalty_gain == cost.penalty_gain);
  check("min_support = obstacle_threshold = 3", cfg.min_support == 3 && cfg.obstacle_threshold == cfg.min_support);
  check("plane RANSAC", cfg.plane.iterations == plane.iterations && cfg.plane.inlier_threshold == plane.inlier_threshold &&
                            plane.iterations == 512 && plane.inlier_threshold == 0.02);
  check("homography gates 400 / 20", cfg.homography.max_features == homography.max_features &&
                                         cfg.homography.min_inliers == homography.min_inliers &&
                                         homography.max_features == 400 && homography.min_inliers == 20);
  check("homography RANSAC", cfg.homography.iterations == homography.iterations && homography.iterations == 2000 &&
                                 cfg.homography.inlier_threshold == homography.inlier_threshold &&
                                 cfg.homography.center_shift_limit == homography.center_shift_limit);
  check("lambda_d = 0.5", cfg.loss.lambda_d == loss.lambda_d && loss.lambda_d == 0.5 &&
                              cfg.loss.epsilon == loss.epsilon);
  check("smoothing window 5, 16 waypoints", cfg.smoothing.window == smoothing.window &&
                                                cfg.smoothing.num_waypoints == smoothing.num_waypoints &&
                                                smoothing.window == 5 && smoothing.num_waypoints == 16);
  check("eval resample = num_waypoints", cfg.eval_resample == cfg.smoothing.num_waypoints);
  RunConfig reparsed;
  navsup::apply_config_text(reparsed, navsup::config_text(cfg));
  check("config text round trip", navsup::config_text(reparsed) == navsup::config_text(cfg));
  return failures == 0 ? navsup::kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navsup: navigation supervision from depth, masks and planning"};
  app.require_subcommand(1);

  ConfigOptions plan_cfg, eval_cfg, align_cfg;

  std::string scene_dir, out_dir;
  auto* plan = app.add_subcommand("plan", "run the teacher planner on a scene directory");
  plan->add_option("--scene", scene_dir, "scene directory (manifest.json)")->required();
  plan->add_option("--out", out_dir, "output directory")->required();
  plan_cfg.attach(plan);

  std::vector<std::string> preds, gts;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "ADE / FDE / DTW between predicted and ground-truth trajectories");
  eval->add_option("--pred", preds, "prediction trajectory files")->required();
  eval->add_option("--gt", gts, "ground-truth trajectory files")->required();
  eval->add_option("--out", eval_out, "JSON report path");
  eval_cfg.attach(eval);

  std::string matches_path, traj_path, align_out, align_report;
  int width = 0, height = 0;
  bool inverse = false;
  auto* align = app.add_subcommand("align", "transfer an image trajectory through a gated homography");
  align->add_option("--matches", matches_path, "correspondence file (sx sy dx dy per line)")->required();
  align->add_option("--trajectory", traj_path, "image-frame trajectory file")->required();
  align->add_option("--width", width, "source image width (px)")->required();
  align->add_option("--height", height, "source image height (px)")->required();
  align->add_flag("--inverse", inverse, "map with the inverse homography");
  align->add_option("--out", align_out, "transferred trajectory path");
  align->add_option("--report", align_report, "fit / rejection report path");
  align_cfg.attach(align);

  std::string gt_labels, wm_labels, mode, compose_out, compose_summary;
  auto* compose = app.add_subcommand("compose", "build a training set from tiered labels");
  compose->add_option("--gt", gt_labels, "ground-truth labels (JSON lines)")->required();
  compose->add_option("--wm", wm_labels, "teacher labels (JSON lines)")->required();
  compose->add_option("--mode", mode,
                      "gt_only | wm_only_usable_borderline | gt_plus_usable | gt_plus_usable_borderline")
      ->required();
  compose->add_option("--out", compose_out, "composed labels path")->required();
  compose->add_option("--summary", compose_summary, "summary JSON path");

  std::string preset, spec_path, synth_out;
  bool list = false;
  auto* synth = app.add_subcommand("synth", "materialize a synthetic scene directory");
  synth->add_option("--preset", preset, "built-in scene id");
  synth->add_option("--spec", spec_path, "scene spec JSON");
  synth->add_option("--out", synth_out, "scene directory to write");
  synth->add_flag("--list", list, "list built-in scenes");

  auto* selftest = app.add_subcommand("selftest", "check that CLI defaults match the library defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors are input errors; --help and friends still exit 0.
    const int code = app.exit(e);
    return code == 0 ? navsup::kExitOk : navsup::kExitInput;
  }

  try {
    if (plan->parsed()) return cmd_plan(scene_dir, out_dir, plan_cfg.resolve(plan));
    if (eval->parsed()) return cmd_eval(preds, gts, eval_cfg.resolve(eval), eval_out);
    if (align->parsed()) {
      return cmd_align(matches_path, traj_path, width, height, inverse, align_cfg.resolve(align), align_out,
                       align_report);
    }
    if (compose->parsed()) return cmd_compose(gt_labels, wm_labels, mode, compose_out, compose_summary);
    if (synth->parsed()) return cmd_synth(preset, spec_path, synth_out, list);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return navsup::kExitInput;
  }
  return navsup::kExitInput;
}
