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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//
//   navsup_acceptance --workdir DIR [--resolution R]

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"

namespace {

using namespace navsup;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + NAVSUP_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------------------------

void fmm_sandwich() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> block(0.0, 0.35);
  const int maps = 200;
  std::size_t cells = 0, violations = 0, reach_mismatch = 0;
  for (int m = 0; m < maps; ++m) {
    const int rows = dim(rng), cols = dim(rng);
    const Cell start{std::uniform_int_distribution<int>(0, rows - 1)(rng),
                     std::uniform_int_distribution<int>(0, cols - 1)(rng)};
    const double res = 0.05;
    const auto cm = oracle::random_costmap(rng, rows, cols, block(rng), res, start);
    const auto f = solve_eikonal(cm, start);
    const auto d = oracle::dijkstra8(cm, start);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double t = f.time(r, c), dj = d.dist(r, c);
        if (std::isfinite(t) != std::isfinite(dj)) ++reach_mismatch;
        if (!std::isfinite(dj)) continue;
        ++cells;
        // Unit minimum slowness: the straight-line distance is a lower bound.
        const double lower = res * std::hypot(double(r - start.row), double(c - start.col));
        if (t < lower - 1e-9 || t > dj + 1e-9) ++violations;
      }
  }
  const double secs = seconds_since(t0);
  report("fmm_dijkstra_sandwich", violations == 0 && reach_mismatch == 0 && secs < 30.0,
         fmt("%d maps, %zu reachable cells, %zu bound violations, %zu reachability mismatches, %.2f s", maps, cells,
             violations, reach_mismatch, secs));
}

void dtw_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> len(1, 6), coord(-3, 3);
  const int pairs = 1000;
  int mismatches = 0;
  for (int i = 0; i < pairs; ++i) {
    std::vector<Vec2> a(len(rng)), b(len(rng));
    const bool lattice = i % 2 == 0;
    for (auto* v : {&a, &b})
      for (auto& p : *v) p = lattice ? Vec2(coord(rng), coord(rng)) : oracle::random_points(rng, 1).front();
    const double got = dtw(Trajectory{FrameTag::kImage, a}, Trajectory{FrameTag::kImage, b}).total_cost;
    if (got != oracle::exhaustive_dtw(a, b)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  report("dtw_exhaustive_equivalence", mismatches == 0 && secs < 10.0,
         fmt("%d pairs, %d mismatches (exact comparison), %.2f s", pairs, mismatches, secs));
}

void metric_identities() {
  const Trajectory gt{FrameTag::kImage, {Vec2(0, 0), Vec2(10, 0), Vec2(10, 10), Vec2(20, 10)}};
  Trajectory pred = gt;
  for (auto& p : pred.points) p += Vec2(3, 4);
  const double a = ade(pred, gt), f = fde(pred, gt);
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<int> len(1, 40);
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const Trajectory x{FrameTag::kImage, oracle::random_points(rng, len(rng))};
    if (dtw_norm(x, x) != 0.0) ++nonzero;
  }
  report("metric_identities", a == 5.0 && f == 5.0 && nonzero == 0,
         fmt("ADE %.17g, FDE %.17g on the (3,4) offset; %d of 100 self-DTW values nonzero", a, f, nonzero));
}

void edt_exactness() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int grids = 100;
  int mismatched = 0;
  for (int g = 0; g < grids; ++g) {
    Grid2<std::uint8_t> blocked(32, 32, 0);
    const double p = g < 5 ? (g == 0 ? 0.0 : 1.0 / (1 << g)) : u01(rng) * 0.3;
    for (auto& v : blocked.data()) v = u01(rng) < p ? 1 : 0;
    if (squared_distance_transform(blocked).data() != oracle::brute_force_edt(blocked).data()) ++mismatched;
  }
  report("distance_transform_exactness", mismatched == 0, fmt("%d random 32x32 grids, %d mismatched", grids, mismatched));
}

Mat3 random_mild_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-0.15, 0.15), sc(0.85, 1.15), tr(-40.0, 40.0), persp(-2e-4, 2e-4);
  const double a = ang(rng), s = sc(rng);
  Mat3 h;
  h << s * std::cos(a), -s * std::sin(a), tr(rng), s * std::sin(a), s * std::cos(a), tr(rng), persp(rng), persp(rng), 1.0;
  return h;
}

void homography_recovery() {
  const ImageSize image{640, 480};
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> u(0.0, 640.0), v(0.0, 480.0), u01(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  const int trials = 100;
  int recovered = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Mat3 truth = random_mild_homography(rng);
    std::vector<Correspondence> matches;
    for (int i = 0; i < 300; ++i) {
      const Vec2 p(u(rng), v(rng));
      Vec2 q = apply_homography(truth, p) + Vec2(noise(rng), noise(rng));
      if (u01(rng) < 0.3) q = Vec2(u(rng), v(rng));
      matches.push_back({p, q});
    }
    HomographyParams params;
    params.seed = static_cast<std::uint64_t>(t);
    const auto out = fit_homography_ransac(matches, image, params);
    if (!out.accepted()) continue;
    double err = 0.0;
    const int held_out = 200;
    for (int i = 0; i < held_out; ++i) {
      const Vec2 p(u(rng), v(rng));
      err += (apply_homography(out.homography->matrix, p) - apply_homography(truth, p)).norm();
    }
    err /= held_out;
    worst = std::max(worst, err);
    if (err < 0.5) ++recovered;
  }

  // 19 exact inliers plus far outliers; every such case must be rejected.
  int accepted_19 = 0;
  const int cases_19 = 100;
  for (int t = 0; t < cases_19; ++t) {
    const Mat3 truth = random_mild_homography(rng);
    std::vector<Correspondence> matches;
    for (int i = 0; i < 19; ++i) {
      const Vec2 p(u(rng), v(rng));
      matches.push_back({p, apply_homography(truth, p)});
    }
    for (int i = 0; i < t % 30; ++i) matches.push_back({Vec2(u(rng), v(rng)), Vec2(u(rng), v(rng))});
    HomographyParams params;
    params.seed = static_cast<std::uint64_t>(t);
    if (fit_homography_ransac(matches, image, params).accepted()) ++accepted_19;
  }
  report("homography_recovery", recovered >= 95 && accepted_19 == 0,
         fmt("%d/%d trials under 0.5 px held-out error (worst accepted %.3f px); %d/%d 19-inlier cases accepted",
             recovered, trials, worst, accepted_19, cases_19));
}

void plane_recovery() {
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> u(-2.0, 2.0), u01(0.0, 1.0), tilt(-0.5, 0.5), off(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.005);
  const int trials = 100;
  int recovered = 0;
  double worst_angle = 0.0, worst_offset = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vec3 n = Vec3(tilt(rng), tilt(rng), 1.0).normalized();
    const NavigationPlane truth{n, off(rng)};
    const PlaneBasis basis = PlaneBasis::of(truth);
    std::vector<Vec3> pts;
    for (int i = 0; i < 2000; ++i) {
      const double h = u01(rng) < 0.2 ? u(rng) : noise(rng);
      pts.push_back(basis.lift(Vec2(u(rng), u(rng)), h));
    }
    PointCloud cloud;
    for (const auto& p : pts) cloud.push_back(p, Vec3::Zero(), 1.0);
    PlaneRansacParams params;
    params.seed = static_cast<std::uint64_t>(t);
    const Vec3 camera = basis.lift(Vec2::Zero(), 2.0);
    const auto fit = fit_plane_ransac(cloud, params, std::span<const Vec3>(&camera, 1));
    const double angle =
        std::acos(std::clamp(fit.plane.normal.dot(truth.normal), -1.0, 1.0)) * 180.0 / std::numbers::pi;
    const double offset_err = std::abs(fit.plane.offset - truth.offset);
    worst_angle = std::max(worst_angle, angle);
    worst_offset = std::max(worst_offset, offset_err);
    if (angle < 1.0 && offset_err < 0.005) ++recovered;
  }
  report("plane_recovery", recovered >= 95,
         fmt("%d/%d trials within 1 deg and 5 mm (worst %.3f deg, %.2f mm)", recovered, trials, worst_angle,
             worst_offset * 1000.0));
}

// ---------------------------------------------------------------------------------------------
// End to end

struct SuiteRun {
  bool ok = true;
  std::string detail;
};

// First run: in-process through the same calls the plan command makes, with oracle checks.
void end_to_end(const fs::path& root, double resolution) {
  RunConfig cfg;
  cfg.resolution = resolution;
  const auto suite = synth::scene_suite();
  const double dtw_bound = 3.0 * resolution;
  std::size_t blocked = 0, far_final = 0, dtw_over = 0, failed = 0;
  double worst_dtw = 0.0, worst_final = 0.0, worst_tie_spread = 0.0;
  std::vector<io::TrajectoryRecord> preds, gts;
  const auto t0 = Clock::now();
  for (const auto& spec : suite) {
    const fs::path scene_dir = root / "run_a" / "scenes" / spec.id;
    const fs::path out_dir = root / "run_a" / "out" / spec.id;
    try {
      io::write_scene_bundle(scene_dir, synthesize_bundle(spec));
      io::write_atomic(scene_dir / "scene_spec.json", io::dump(io::to_json(spec)));
      const auto bundle = io::read_scene_bundle(scene_dir);
      const auto res = plan_scene(bundle, cfg);
      write_plan_outputs(out_dir, res, cfg);

      const auto& pts = res.plane_trajectory.points;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto cell = res.costmap.cell_of(pts[i]);
        bool bad = !cell || !res.costmap.is_free(*cell);
        if (i > 0 && !detail::segment_is_free(res.costmap, pts[i - 1], pts[i])) bad = true;
        blocked += bad;
      }
      const double final_err = (pts.back() - res.costmap.cell_center(res.goal)).norm();
      worst_final = std::max(worst_final, final_err);
      far_final += final_err > 0.10;

      const auto d = oracle::dijkstra8(res.costmap, res.start_cell);
      const auto opath = oracle::dijkstra_path(d, res.goal);
      std::vector<Vec2> centers;
      for (const auto& c : opath) centers.push_back(res.costmap.cell_center(c));
      const Trajectory oracle_traj{FrameTag::kPlane,
                                   resample_by_arc_length(centers, cfg.smoothing.num_waypoints)};
      const double dn = dtw_norm(res.plane_trajectory, oracle_traj);
      // Spread among equally optimal eight-neighbor paths to the same goal.
      auto as_traj = [&](const std::vector<Cell>& cells) {
        std::vector<Vec2> pts;
        for (const auto& c : cells) pts.push_back(res.costmap.cell_center(c));
        return Trajectory{FrameTag::kPlane, resample_by_arc_length(pts, cfg.smoothing.num_waypoints)};
      };
      const auto diag_first = oracle::tight_backtrack(d, res.costmap, res.goal, true);
      const auto straight_first = oracle::tight_backtrack(d, res.costmap, res.goal, false);
      if (diag_first.front() == res.start_cell && straight_first.front() == res.start_cell) {
        worst_tie_spread = std::max(worst_tie_spread, dtw_norm(as_traj(diag_first), as_traj(straight_first)));
      }
      worst_dtw = std::max(worst_dtw, dn);
      if (!(dn < dtw_bound)) {
        ++dtw_over;
        std::cout << "  " << spec.id << ": dtw_norm " << dn << " m\n";
      }
      gts.push_back(io::TrajectoryRecord{spec.id, oracle_traj, io::json{{"generator", "dijkstra oracle"}}});
      io::write_trajectory(root / "run_a" / "oracle" / (spec.id + ".json"), gts.back());
      preds.push_back(io::read_trajectory(out_dir / "trajectory_plane.json"));
    } catch (const Error& e) {
      ++failed;
      std::cout << "  " << spec.id << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = suite.size() >= 10 && failed == 0 && blocked == 0 && far_final == 0 && dtw_over == 0 && secs < 120.0;
  report("end_to_end_planning", ok,
         fmt("%zu scenes at %.3f m, %zu failed, %zu blocked waypoints/segments, worst final offset %.4f m (%zu over "
             "0.10), worst dtw_norm vs oracle %.4f m (bound %.4f, %zu over), %.1f s; two equally optimal "
             "eight-neighbor paths to the same goal differ by up to %.4f m dtw_norm",
             suite.size(), resolution, failed, blocked, worst_final, far_final, worst_dtw, dtw_bound, dtw_over, secs,
             worst_tie_spread));
  if (!preds.empty()) {
    const auto rep = evaluate_records(preds, gts, cfg.eval_resample);
    io::write_atomic(root / "run_a" / "eval_report.json", io::dump(eval_report_json(rep)));
  }
}

// Second run: the same suite through the command-line tool; every file must match the first run byte for byte.
void determinism(const fs::path& root, double resolution) {
  const auto suite = synth::scene_suite();
  const fs::path log = root / "cli_log.txt";
  std::size_t compared = 0, differing = 0, cli_errors = 0;
  auto same = [&](const fs::path& a, const fs::path& b) {
    ++compared;
    std::string x, y;
    try {
      x = io::read_text(a);
      y = io::read_text(b);
    } catch (const Error&) {
      ++differing;
      return;
    }
    if (x != y) {
      ++differing;
      std::cout << "  differs: " << b.string() << "\n";
    }
  };
  std::string preds, gts;
  for (const auto& spec : suite) {
    const fs::path scene_dir = root / "run_b" / "scenes" / spec.id;
    const fs::path out_dir = root / "run_b" / "out" / spec.id;
    if (run_cli("synth --preset " + spec.id + " --out \"" + scene_dir.string() + "\"", log) != 0) ++cli_errors;
    if (run_cli("plan --resolution " + fmt("%.17g", resolution) + " --scene \"" + scene_dir.string() + "\" --out \"" +
                    out_dir.string() + "\"",
                log) != 0)
      ++cli_errors;
    for (const auto& entry : fs::directory_iterator(root / "run_a" / "scenes" / spec.id))
      same(entry.path(), scene_dir / entry.path().filename());
    for (const char* f : {"trajectory_plane.json", "trajectory_image.json", "costmap.txt", "arrival.txt"})
      same(root / "run_a" / "out" / spec.id / f, out_dir / f);
    preds += " \"" + (out_dir / "trajectory_plane.json").string() + "\"";
    gts += " \"" + (root / "run_a" / "oracle" / (spec.id + ".json")).string() + "\"";
  }
  if (run_cli("eval --pred" + preds + " --gt" + gts + " --out \"" + (root / "run_b" / "eval_report.json").string() +
                  "\"",
              log) != 0)
    ++cli_errors;
  same(root / "run_a" / "eval_report.json", root / "run_b" / "eval_report.json");
  report("determinism", differing == 0 && cli_errors == 0,
         fmt("%zu files compared between an in-process run and a command-line run, %zu differ, %zu command errors",
             compared, differing, cli_errors));
}

// ---------------------------------------------------------------------------------------------
// Supervision

using Path = std::vector<Vec2>;

PseudoLabel fixture_label(std::string scene, Tier tier, LabelSource src, double x) {
  return PseudoLabel{std::move(scene), Trajectory{FrameTag::kImage, {Vec2(x, 0), Vec2(x, 1)}}, tier, src};
}

void supervision(const fs::path& root) {
  // Hand cases at the default lambda_d = 0.5.
  std::vector<std::string> problems;
  {
    const Path y{Vec2(1, 0), Vec2(2, 1), Vec2(2, 3)};
    if (hypothesis_loss(y, Vec2::Zero(), y) != 0.0) problems.push_back("identical != 0");
  }
  {
    const Path target{Vec2(1, 0), Vec2(1, 2), Vec2(4, 2)};
    const Path pred{Vec2(-1, 0), Vec2(-1, -2), Vec2(-4, -2)};
    const double dir = hypothesis_loss_terms(pred, Vec2::Zero(), target, LossParams{}).direction;
    if (dir != 1.0) problems.push_back(fmt("reversed direction term %.17g != 1.0", dir));
  }
  {
    const Path target{Vec2(1, 0), Vec2(2, 0)};
    const Path pred{Vec2(1, 1), Vec2(2, 1)};
    const auto terms = hypothesis_loss_terms(pred, Vec2::Zero(), target, LossParams{});
    if (terms.regression != 1.0) problems.push_back(fmt("parallel-offset regression %.17g != 1.0", terms.regression));
    if (terms.direction != 0.0) {
      problems.push_back(fmt("parallel-offset direction %.6f != 0 (the first segment is anchored at the start, so "
                             "start->(1,1) vs start->(1,0) costs 0.25*(1-cos 45deg); the reversed-segment case "
                             "needs that anchor)",
                             terms.direction));
    }
  }

  // Best-of-K never increases as hypotheses are added.
  std::mt19937_64 rng(1008);
  std::uniform_int_distribution<int> len(1, 8), kdist(1, 6);
  int nonmonotone = 0;
  const int sets = 1000;
  for (int s = 0; s < sets; ++s) {
    const std::size_t t = len(rng);
    Sample sample;
    sample.hypotheses.start = oracle::random_points(rng, 1).front();
    sample.target = oracle::random_points(rng, t);
    const int k = kdist(rng);
    double previous = kInf;
    for (int i = 0; i < k + 1; ++i) {
      sample.hypotheses.trajectories.push_back(oracle::random_points(rng, t));
      const double loss = best_of_k_loss(std::span<const Sample>(&sample, 1));
      if (loss > previous) ++nonmonotone;
      previous = loss;
    }
  }

  // Compositions through the command line, counted by an independent filter over the fixture file.
  std::vector<PseudoLabel> gt, wm;
  const Tier tiers[] = {Tier::kUsable, Tier::kBorderline, Tier::kReject};
  for (int i = 0; i < 9; ++i) gt.push_back(fixture_label("g" + std::to_string(i), tiers[i % 3], LabelSource::kGroundTruth, i));
  for (int i = 0; i < 14; ++i) wm.push_back(fixture_label("w" + std::to_string(i), tiers[(i * 7) % 3], LabelSource::kTeacher, i));
  const fs::path dir = root / "compose";
  io::write_atomic(dir / "gt.jsonl", io::format_labels(gt));
  io::write_atomic(dir / "wm.jsonl", io::format_labels(wm));
  std::string compose_detail;
  int compose_bad = 0;
  for (const char* mode : {"gt_only", "wm_only_usable_borderline", "gt_plus_usable", "gt_plus_usable_borderline"}) {
    const fs::path out = dir / (std::string(mode) + ".jsonl");
    const int code = run_cli("compose --gt \"" + (dir / "gt.jsonl").string() + "\" --wm \"" + (dir / "wm.jsonl").string() +
                                 "\" --mode " + mode + " --out \"" + out.string() + "\"",
                             dir / "log.txt");
    std::size_t expected = 0;
    for (const auto* set : {&gt, &wm})
      for (const auto& l : io::parse_labels(io::format_labels(*set), "fixture")) expected += oracle::admitted(l, mode);
    std::size_t got = 0;
    bool admissible = true;
    if (code == 0) {
      const auto labels = io::parse_labels(io::read_text(out), out.string());
      got = labels.size();
      for (const auto& l : labels) admissible = admissible && oracle::admitted(l, mode);
    }
    if (code != 0 || got != expected || !admissible) ++compose_bad;
    compose_detail += fmt(" %s=%zu/%zu", mode, got, expected);
  }

  std::string detail = fmt("best-of-K non-monotone steps %d over %d sets; compositions%s", nonmonotone, sets,
                           compose_detail.c_str());
  for (const auto& p : problems) detail += "; hand case: " + p;
  report("loss_and_supervision", problems.empty() && nonmonotone == 0 && compose_bad == 0, detail);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path workdir = fs::temp_directory_path() / "navsup_acceptance";
  double resolution = 0.005;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (arg == "--resolution" && i + 1 < argc) {
      resolution = std::stod(argv[++i]);
    } else {
      std::cerr << "usage: navsup_acceptance [--workdir DIR] [--resolution R]\n";
      return 2;
    }
  }
  fs::remove_all(workdir);
  fs::create_directories(workdir);

  fmm_sandwich();
  dtw_oracle();
  metric_identities();
  edt_exactness();
  homography_recovery();
  plane_recovery();
  end_to_end(workdir, resolution);
  supervision(workdir);
  determinism(workdir, resolution);

  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
