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

// File formats: binary PGM/PPM images (16-bit depth in millimeters, 0 = invalid), JSON documents for
// manifests, scene specs and trajectories, JSON lines for pseudo-labels, and whitespace text for
// correspondences and grid dumps.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "navsup/bev.hpp"
#include "navsup/camera.hpp"
#include "navsup/common.hpp"
#include "navsup/costmap.hpp"
#include "navsup/fmm.hpp"
#include "navsup/homography.hpp"
#include "navsup/supervision.hpp"
#include "navsup/synth.hpp"
#include "navsup/trajectory.hpp"

namespace navsup::io {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------------------------
// Raw files

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary and renames, so readers never see a partial file.
inline void write_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, what + ": " + e.what());
  }
}

// Shortest decimal text that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------------------------
// Netpbm images

struct Netpbm {
  char kind = '5';  // '5' grayscale, '6' RGB
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> samples;  // width * height * channels
};

inline Netpbm decode_netpbm(const std::string& bytes, const std::string& name) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  Netpbm img;
  const std::string magic = token();
  if (magic != "P5" && magic != "P6") throw Error(ErrorKind::kParse, name + ": not a binary PGM/PPM");
  img.kind = magic[1];
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    img.maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, name + ": malformed header");
  }
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535) {
    throw Error(ErrorKind::kParse, name + ": bad dimensions");
  }
  ++pos;  // single whitespace after maxval
  const int channels = img.kind == '6' ? 3 : 1;
  const int bytes_per = img.maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * channels;
  if (bytes.size() < pos + count * bytes_per) throw Error(ErrorKind::kParse, name + ": truncated pixel data");
  img.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (bytes_per == 2) {
      img.samples[i] = static_cast<std::uint16_t>((static_cast<unsigned char>(bytes[pos + 2 * i]) << 8) |
                                                  static_cast<unsigned char>(bytes[pos + 2 * i + 1]));
    } else {
      img.samples[i] = static_cast<unsigned char>(bytes[pos + i]);
    }
  }
  return img;
}

inline std::string encode_netpbm(const Netpbm& img) {
  std::string out = std::string("P") + img.kind + "\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n" + std::to_string(img.maxval) + "\n";
  const bool wide = img.maxval > 255;
  out.reserve(out.size() + img.samples.size() * (wide ? 2 : 1));
  for (auto s : img.samples) {
    if (wide) {
      out.push_back(static_cast<char>(s >> 8));
      out.push_back(static_cast<char>(s & 0xFF));
    } else {
      out.push_back(static_cast<char>(s));
    }
  }
  return out;
}

// Depth in millimeters, 16-bit; 0 means invalid.
inline std::string encode_depth_pgm(const DepthFrame& d) {
  Netpbm img{'5', d.width, d.height, 65535, {}};
  img.samples.resize(d.depth.size(), 0);
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    if (!d.valid[i]) continue;
    const long mm = std::lround(d.depth[i] * 1000.0);
    img.samples[i] = static_cast<std::uint16_t>(std::clamp(mm, 0L, 65535L));
  }
  return encode_netpbm(img);
}

inline DepthFrame decode_depth_pgm(const std::string& bytes, const std::string& name) {
  const Netpbm img = decode_netpbm(bytes, name);
  if (img.kind != '5') throw Error(ErrorKind::kParse, name + ": depth must be grayscale");
  DepthFrame d(img.width, img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (img.samples[i] == 0) continue;
    d.depth[i] = img.samples[i] / 1000.0;
    d.valid[i] = 1;
  }
  return d;
}

inline std::string encode_ppm(const ColorImage& c) {
  Netpbm img{'6', c.width, c.height, 255, {}};
  img.samples.reserve(c.pixels.size() * 3);
  for (const auto& px : c.pixels) img.samples.insert(img.samples.end(), {px[0], px[1], px[2]});
  return encode_netpbm(img);
}

inline ColorImage decode_ppm(const std::string& bytes, const std::string& name) {
  const Netpbm img = decode_netpbm(bytes, name);
  if (img.kind != '6' || img.maxval > 255) throw Error(ErrorKind::kParse, name + ": expected 8-bit PPM");
  ColorImage c(img.width, img.height);
  for (std::size_t i = 0; i < c.pixels.size(); ++i) {
    c.pixels[i] = Rgb8{static_cast<std::uint8_t>(img.samples[3 * i]), static_cast<std::uint8_t>(img.samples[3 * i + 1]),
                       static_cast<std::uint8_t>(img.samples[3 * i + 2])};
  }
  return c;
}

inline std::string encode_mask_pgm(const LabeledMask& m) {
  Netpbm img{'5', m.width, m.height, 255, {}};
  img.samples.reserve(m.bits.size());
  for (auto b : m.bits) img.samples.push_back(b ? 255 : 0);
  return encode_netpbm(img);
}

inline LabeledMask decode_mask_pgm(const std::string& bytes, const std::string& name) {
  const Netpbm img = decode_netpbm(bytes, name);
  if (img.kind != '5') throw Error(ErrorKind::kParse, name + ": mask must be grayscale");
  LabeledMask m("", MaskKind::kTarget, img.width, img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) m.bits[i] = img.samples[i] != 0 ? 1 : 0;
  return m;
}

// ---------------------------------------------------------------------------------------------
// JSON helpers

inline json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json to_json(const Rgb8& c) { return json::array({c[0], c[1], c[2]}); }

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::kParse, where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, where + ": bad '" + key + "': " + e.what());
  }
}

inline Vec2 vec2_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::kParse, where + ": expected [x, y]");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

inline Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::kParse, where + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline Rgb8 rgb_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::kParse, where + ": expected [r, g, b]");
  return Rgb8{j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

inline json to_json(const CameraIntrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline CameraIntrinsics intrinsics_from(const json& j, const std::string& where) {
  CameraIntrinsics k;
  k.fx = get<double>(j, "fx", where);
  k.fy = get<double>(j, "fy", where);
  k.cx = get<double>(j, "cx", where);
  k.cy = get<double>(j, "cy", where);
  k.width = get<int>(j, "width", where);
  k.height = get<int>(j, "height", where);
  return k;
}

// Rotation stored row-major.
inline json to_json(const Pose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(p.rotation(i, k));
  return json{{"rotation", r}, {"translation", to_json(p.translation)}};
}

inline Pose pose_from(const json& j, const std::string& where) {
  Pose p;
  const auto r = get<std::vector<double>>(j, "rotation", where);
  if (r.size() != 9) throw Error(ErrorKind::kParse, where + ": rotation needs 9 values");
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) p.rotation(i, k) = r[3 * i + k];
  p.translation = vec3_from(j.at("translation"), where + ".translation");
  return p;
}

// ---------------------------------------------------------------------------------------------
// Trajectories and labels

struct TrajectoryRecord {
  std::string scene_id;
  Trajectory trajectory;
  json provenance = json::object();
};

inline json to_json(const TrajectoryRecord& rec) {
  json pts = json::array();
  for (const auto& p : rec.trajectory.points) pts.push_back(to_json(p));
  return json{{"scene_id", rec.scene_id},
              {"frame", to_string(rec.trajectory.frame)},
              {"points", pts},
              {"provenance", rec.provenance}};
}

inline Trajectory trajectory_points_from(const json& j, FrameTag frame, const std::string& where) {
  Trajectory t;
  t.frame = frame;
  if (!j.is_array()) throw Error(ErrorKind::kParse, where + ": points must be an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    t.points.push_back(vec2_from(j[i], where + ".points[" + std::to_string(i) + "]"));
    if (!t.points.back().allFinite()) throw Error(ErrorKind::kParse, where + ": non-finite point");
  }
  return t;
}

inline TrajectoryRecord trajectory_record_from(const json& j, const std::string& where) {
  TrajectoryRecord rec;
  rec.scene_id = get<std::string>(j, "scene_id", where);
  const FrameTag frame = frame_tag_from_string(get<std::string>(j, "frame", where));
  rec.trajectory = trajectory_points_from(j.at("points"), frame, where);
  if (j.contains("provenance")) rec.provenance = j.at("provenance");
  return rec;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_trajectory(const fs::path& path, const TrajectoryRecord& rec) { write_atomic(path, dump(to_json(rec))); }

inline TrajectoryRecord read_trajectory(const fs::path& path) {
  return trajectory_record_from(parse_json(read_text(path), path.string()), path.string());
}

inline json to_json(const PseudoLabel& l) {
  json pts = json::array();
  for (const auto& p : l.trajectory.points) pts.push_back(to_json(p));
  return json{{"scene_id", l.scene_id},
              {"tier", to_string(l.tier)},
              {"source", to_string(l.source)},
              {"frame", to_string(l.trajectory.frame)},
              {"points", pts}};
}

inline PseudoLabel label_from(const json& j, const std::string& where) {
  PseudoLabel l;
  l.scene_id = get<std::string>(j, "scene_id", where);
  l.tier = tier_from_string(get<std::string>(j, "tier", where));
  l.source = source_from_string(get<std::string>(j, "source", where));
  const FrameTag frame = j.contains("frame") ? frame_tag_from_string(j.at("frame").get<std::string>()) : FrameTag::kImage;
  l.trajectory = trajectory_points_from(j.at("points"), frame, where);
  return l;
}

// One JSON object per line; blank lines are skipped. Every malformed line is reported.
inline std::vector<PseudoLabel> parse_labels(const std::string& text, const std::string& name) {
  std::vector<PseudoLabel> out;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    try {
      out.push_back(label_from(parse_json(line, where), where));
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " malformed label record(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorKind::kParse, msg);
  }
  return out;
}

inline std::string format_labels(const std::vector<PseudoLabel>& labels) {
  std::string out;
  for (const auto& l : labels) out += to_json(l).dump() + "\n";
  return out;
}

// "sx sy dx dy" per line; '#' starts a comment.
inline std::vector<Correspondence> parse_correspondences(const std::string& text, const std::string& name) {
  std::vector<Correspondence> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double v[4];
    int n = 0;
    while (n < 4 && ls >> v[n]) ++n;
    if (n == 0 && ls.eof()) continue;
    std::string extra;
    if (n != 4 || (ls >> extra)) {
      throw Error(ErrorKind::kParse, name + ":" + std::to_string(lineno) + ": expected 'sx sy dx dy'");
    }
    Correspondence c{Vec2(v[0], v[1]), Vec2(v[2], v[3])};
    if (!c.src.allFinite() || !c.dst.allFinite()) {
      throw Error(ErrorKind::kParse, name + ":" + std::to_string(lineno) + ": non-finite value");
    }
    out.push_back(c);
  }
  return out;
}

inline std::string format_correspondences(const std::vector<Correspondence>& matches) {
  std::string out;
  for (const auto& m : matches) {
    out += format_double(m.src.x()) + " " + format_double(m.src.y()) + " " + format_double(m.dst.x()) + " " +
           format_double(m.dst.y()) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Scene specs and scene bundles

inline json to_json(const synth::SceneSpec& s) {
  json boxes = json::array();
  for (const auto& b : s.boxes) {
    boxes.push_back(json{{"center", to_json(b.center)}, {"size", to_json(b.size)}, {"color", to_json(b.color)}});
  }
  json poses = json::array();
  for (const auto& p : s.poses) poses.push_back(to_json(p));
  json j{{"id", s.id},
         {"seed", s.seed},
         {"floor", json{{"min", to_json(s.floor.min)}, {"max", to_json(s.floor.max)}}},
         {"floor_color", to_json(s.floor_color)},
         {"boxes", boxes},
         {"intrinsics", to_json(s.intrinsics)},
         {"poses", poses},
         {"start", to_json(s.start)},
         {"depth_noise_sigma", s.depth_noise_sigma},
         {"instruction", s.instruction}};
  if (s.target) {
    j["target"] = json{{"min", to_json(s.target->area.min)},
                       {"max", to_json(s.target->area.max)},
                       {"class_name", s.target->class_name},
                       {"color", to_json(s.target->color)}};
  }
  return j;
}

inline synth::SceneSpec scene_spec_from(const json& j, const std::string& where) {
  synth::SceneSpec s;
  try {
    s.id = get<std::string>(j, "id", where);
    s.seed = j.value("seed", std::uint64_t{0});
    const auto& floor = j.at("floor");
    s.floor = synth::Rect{vec2_from(floor.at("min"), where + ".floor.min"), vec2_from(floor.at("max"), where + ".floor.max")};
    if (j.contains("floor_color")) s.floor_color = rgb_from(j.at("floor_color"), where + ".floor_color");
    for (const auto& b : j.value("boxes", json::array())) {
      synth::Box box;
      box.center = vec2_from(b.at("center"), where + ".boxes.center");
      box.size = vec3_from(b.at("size"), where + ".boxes.size");
      if (b.contains("color")) box.color = rgb_from(b.at("color"), where + ".boxes.color");
      s.boxes.push_back(box);
    }
    if (j.contains("target")) {
      const auto& t = j.at("target");
      synth::TargetPatch patch;
      patch.area = synth::Rect{vec2_from(t.at("min"), where + ".target.min"), vec2_from(t.at("max"), where + ".target.max")};
      patch.class_name = t.value("class_name", std::string("target"));
      if (t.contains("color")) patch.color = rgb_from(t.at("color"), where + ".target.color");
      s.target = patch;
    }
    s.intrinsics = j.contains("intrinsics") ? intrinsics_from(j.at("intrinsics"), where + ".intrinsics")
                                            : synth::default_intrinsics();
    if (j.contains("poses")) {
      for (const auto& p : j.at("poses")) s.poses.push_back(pose_from(p, where + ".poses"));
    } else {
      s.poses = synth::default_camera_script(s.floor, s.intrinsics);
    }
    s.start = vec2_from(j.at("start"), where + ".start");
    s.depth_noise_sigma = j.value("depth_noise_sigma", 0.0);
    s.instruction = j.value("instruction", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, where + ": " + e.what());
  }
  s.validate();
  return s;
}

// A scene directory: manifest.json plus per-frame depth (PGM16, mm), color (PPM) and mask (PGM) files.
struct SceneBundle {
  std::string scene_id;
  std::string instruction;
  Vec2 start = Vec2::Zero();  // planar meters in the estimated plane's basis
  std::vector<CameraFrame> frames;
};

inline void write_scene_bundle(const fs::path& dir, const SceneBundle& bundle) {
  fs::create_directories(dir);
  json frames = json::array();
  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    const auto& f = bundle.frames[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "%03zu", i);
    const std::string depth_name = std::string("depth_") + stem + ".pgm";
    const std::string color_name = std::string("color_") + stem + ".ppm";
    write_atomic(dir / depth_name, encode_depth_pgm(f.depth));
    write_atomic(dir / color_name, encode_ppm(f.color));
    json masks = json::array();
    for (const auto& m : f.masks) {
      const std::string mask_name = std::string("mask_") + stem + "_" + to_string(m.kind) + ".pgm";
      write_atomic(dir / mask_name, encode_mask_pgm(m));
      masks.push_back(json{{"kind", to_string(m.kind)}, {"file", mask_name}, {"class_name", m.class_name}});
    }
    frames.push_back(json{{"id", f.id}, {"pose", to_json(f.pose)}, {"depth", depth_name}, {"color", color_name}, {"masks", masks}});
  }
  if (bundle.frames.empty()) throw Error(ErrorKind::kInvalidInput, "scene bundle has no frames");
  const json manifest{{"scene_id", bundle.scene_id},
                      {"instruction", bundle.instruction},
                      {"start", to_json(bundle.start)},
                      {"intrinsics", to_json(bundle.frames.front().intrinsics)},
                      {"frames", frames}};
  write_atomic(dir / "manifest.json", dump(manifest));
}

inline SceneBundle read_scene_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const json m = parse_json(read_text(manifest_path), manifest_path.string());
  const std::string where = manifest_path.string();
  SceneBundle b;
  b.scene_id = get<std::string>(m, "scene_id", where);
  b.instruction = m.value("instruction", std::string());
  b.start = vec2_from(m.at("start"), where + ".start");
  const CameraIntrinsics k = intrinsics_from(m.at("intrinsics"), where + ".intrinsics");
  const json frames = m.value("frames", json::array());
  if (frames.empty()) throw Error(ErrorKind::kParse, where + ": no frames");
  for (const auto& fj : frames) {
    CameraFrame f;
    f.id = get<std::string>(fj, "id", where);
    f.intrinsics = k;
    f.pose = pose_from(fj.at("pose"), where + "." + f.id + ".pose");
    const auto depth_file = get<std::string>(fj, "depth", where);
    f.depth = decode_depth_pgm(read_text(dir / depth_file), depth_file);
    if (fj.contains("color")) {
      const auto color_file = fj.at("color").get<std::string>();
      f.color = decode_ppm(read_text(dir / color_file), color_file);
    }
    for (const auto& mj : fj.value("masks", json::array())) {
      const auto file = get<std::string>(mj, "file", where);
      LabeledMask mask = decode_mask_pgm(read_text(dir / file), file);
      mask.frame_id = f.id;
      const auto kind = get<std::string>(mj, "kind", where);
      if (kind == "target") {
        mask.kind = MaskKind::kTarget;
      } else if (kind == "obstacle") {
        mask.kind = MaskKind::kObstacle;
      } else {
        throw Error(ErrorKind::kParse, where + ": unknown mask kind '" + kind + "'");
      }
      mask.class_name = mj.value("class_name", std::string());
      f.masks.push_back(std::move(mask));
    }
    try {
      f.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    b.frames.push_back(std::move(f));
  }
  return b;
}

// ---------------------------------------------------------------------------------------------
// Grid exports

// Fused color with unobserved cells black, plus a sidecar with the grid geometry.
inline void write_bev_exports(const fs::path& dir, const BevGrid& grid) {
  ColorImage img(grid.cols(), grid.rows());
  Netpbm target{'5', grid.cols(), grid.rows(), 255, {}};
  Netpbm obstacle = target;
  target.samples.assign(static_cast<std::size_t>(grid.rows()) * grid.cols(), 0);
  obstacle.samples = target.samples;
  std::uint32_t max_t = 1, max_o = 1;
  for (const auto& c : grid.cells().data()) {
    max_t = std::max(max_t, c.target_support);
    max_o = std::max(max_o, c.obstacle_support);
  }
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      const Cell cell{r, c};
      const std::size_t i = grid.cells().index(cell);
      if (const auto color = fused_color(grid, cell)) {
        img.at(c, r) = Rgb8{static_cast<std::uint8_t>(std::lround(std::clamp((*color)[0], 0.0, 255.0))),
                            static_cast<std::uint8_t>(std::lround(std::clamp((*color)[1], 0.0, 255.0))),
                            static_cast<std::uint8_t>(std::lround(std::clamp((*color)[2], 0.0, 255.0)))};
      }
      target.samples[i] = static_cast<std::uint16_t>(255u * grid.at(cell).target_support / max_t);
      obstacle.samples[i] = static_cast<std::uint16_t>(255u * grid.at(cell).obstacle_support / max_o);
    }
  }
  write_atomic(dir / "bev_color.ppm", encode_ppm(img));
  write_atomic(dir / "bev_target.pgm", encode_netpbm(target));
  write_atomic(dir / "bev_obstacle.pgm", encode_netpbm(obstacle));
  std::ostringstream side;
  side << "origin_x " << format_double(grid.origin().x()) << "\n"
       << "origin_y " << format_double(grid.origin().y()) << "\n"
       << "resolution " << format_double(grid.resolution()) << "\n"
       << "rows " << grid.rows() << "\n"
       << "cols " << grid.cols() << "\n";
  write_atomic(dir / "bev.txt", side.str());
}

// Header "rows cols resolution origin_x origin_y", then one row of values per line; `sentinel`
// replaces non-finite entries.
inline std::string format_grid_dump(const Grid2<double>& values, double resolution, const Vec2& origin,
                                    const std::string& sentinel) {
  std::ostringstream out;
  out << values.rows() << " " << values.cols() << " " << format_double(resolution) << " "
      << format_double(origin.x()) << " " << format_double(origin.y()) << "\n";
  char buf[32];
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c) {
      if (c) out << ' ';
      const double v = values(r, c);
      if (std::isfinite(v)) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        out << buf;
      } else {
        out << sentinel;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace navsup::io
