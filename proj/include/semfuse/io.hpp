// Copyright 2026 The semfuse authors
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

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semfuse/camera.hpp"
#include "semfuse/errors.hpp"
#include "semfuse/evaluation.hpp"
#include "semfuse/fusion.hpp"
#include "semfuse/geometry.hpp"
#include "semfuse/motion.hpp"
#include "semfuse/occlusion.hpp"
#include "semfuse/semantics.hpp"
#include "semfuse/slic.hpp"
#include "semfuse/synthscene.hpp"

namespace semfuse {

namespace io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Low-level helpers

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw ConfigError("write failed for " + path.string());
  }
}

/// Fixed 9-significant-digit float formatting used by every CSV writer.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void magic(const char m[5]) { bytes_.append(m, 4); }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& origin)
      : data_(data), origin_(origin) {}

  std::uint32_t u32() {
    if (pos_ + 4 > data_.size()) {
      throw FormatError(origin_ + ": truncated");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }

  void expect_magic(const char m[5]) {
    if (pos_ + 4 > data_.size() || data_.compare(pos_, 4, m, 4) != 0) {
      throw FormatError(origin_ + ": bad magic, expected " + m);
    }
    pos_ += 4;
  }
  bool exhausted() const { return pos_ == data_.size(); }
  const std::string& origin() const { return origin_; }

 private:
  const std::string& data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Binary raster containers (magic + u32 dims + payload, little-endian)

inline void save_score_map(const ScoreMap& m, const std::filesystem::path& path) {
  ByteWriter w;
  w.magic("SFSM");
  w.u32(static_cast<std::uint32_t>(m.classes));
  w.u32(static_cast<std::uint32_t>(m.height));
  w.u32(static_cast<std::uint32_t>(m.width));
  for (float s : m.scores) w.f32(s);
  write_file(path, w.take());
}

inline ScoreMap load_score_map(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, path.string());
  r.expect_magic("SFSM");
  ScoreMap m;
  m.classes = static_cast<int>(r.u32());
  m.height = static_cast<int>(r.u32());
  m.width = static_cast<int>(r.u32());
  if (m.classes < 2 || m.height < 1 || m.width < 1) {
    throw FormatError(path.string() + ": implausible score map dimensions");
  }
  m.scores.resize(static_cast<std::size_t>(m.classes) * m.height * m.width);
  for (float& s : m.scores) s = r.f32();
  if (!r.exhausted()) {
    throw FormatError(path.string() + ": trailing bytes");
  }
  return m;
}

inline void save_superpixel_map(const SuperpixelMap& sp, const std::filesystem::path& path) {
  ByteWriter w;
  w.magic("SFSP");
  w.u32(static_cast<std::uint32_t>(sp.height));
  w.u32(static_cast<std::uint32_t>(sp.width));
  w.u32(sp.count);
  for (std::uint32_t id : sp.assignment) w.u32(id);
  write_file(path, w.take());
}

inline SuperpixelMap load_superpixel_map(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, path.string());
  r.expect_magic("SFSP");
  SuperpixelMap sp;
  sp.height = static_cast<int>(r.u32());
  sp.width = static_cast<int>(r.u32());
  sp.count = r.u32();
  sp.assignment.resize(static_cast<std::size_t>(sp.height) * sp.width);
  for (std::uint32_t& id : sp.assignment) {
    id = r.u32();
    if (id >= sp.count) {
      throw FormatError(path.string() + ": superpixel id outside [0, K)");
    }
  }
  if (!r.exhausted()) {
    throw FormatError(path.string() + ": trailing bytes");
  }
  return sp;
}

inline void save_label_image(const LabelImage& li, const std::filesystem::path& path) {
  ByteWriter w;
  w.magic("SFLB");
  w.u32(static_cast<std::uint32_t>(li.height));
  w.u32(static_cast<std::uint32_t>(li.width));
  w.u32(static_cast<std::uint32_t>(li.classes));
  for (std::uint32_t label : li.labels) w.u32(label);
  write_file(path, w.take());
}

inline LabelImage load_label_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, path.string());
  r.expect_magic("SFLB");
  LabelImage li;
  li.height = static_cast<int>(r.u32());
  li.width = static_cast<int>(r.u32());
  li.classes = static_cast<int>(r.u32());
  li.labels.resize(static_cast<std::size_t>(li.height) * li.width);
  for (std::uint32_t& label : li.labels) {
    label = r.u32();
    if (label >= static_cast<std::uint32_t>(li.classes)) {
      throw FormatError(path.string() + ": label outside [0, c)");
    }
  }
  return li;
}

inline void save_probability_image(const ProbabilityImage& p,
                                   const std::filesystem::path& path) {
  ByteWriter w;
  w.magic("SFPB");
  w.u32(static_cast<std::uint32_t>(p.classes));
  w.u32(static_cast<std::uint32_t>(p.height));
  w.u32(static_cast<std::uint32_t>(p.width));
  for (double v : p.probs) w.f32(static_cast<float>(v));
  write_file(path, w.take());
}

/// Loads the 32-bit payload and renormalizes each pixel in double precision,
/// restoring the exact sum-to-one invariant the narrowing disturbed.
inline ProbabilityImage load_probability_image(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, path.string());
  r.expect_magic("SFPB");
  ProbabilityImage p;
  p.classes = static_cast<int>(r.u32());
  p.height = static_cast<int>(r.u32());
  p.width = static_cast<int>(r.u32());
  p.probs.resize(static_cast<std::size_t>(p.classes) * p.height * p.width);
  for (double& v : p.probs) v = static_cast<double>(r.f32());
  const std::size_t plane = static_cast<std::size_t>(p.height) * p.width;
  for (std::size_t px = 0; px < plane; ++px) {
    double sum = 0.0;
    for (int c = 0; c < p.classes; ++c) sum += p.probs[px + c * plane];
    if (sum <= 0.0) {
      throw FormatError(path.string() + ": non-positive probability mass");
    }
    for (int c = 0; c < p.classes; ++c) p.probs[px + c * plane] /= sum;
  }
  return p;
}

// ---------------------------------------------------------------------------
// PPM (P6) rasters, for superpixel segmentation inputs

inline void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  write_file(path, out);
}

inline RgbImage load_ppm(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  std::string token;
  auto next_token = [&]() {
    while (in >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return token;
    }
    throw FormatError(path.string() + ": truncated PPM header");
  };
  if (next_token() != "P6") {
    throw FormatError(path.string() + ": not a binary PPM (P6)");
  }
  RgbImage img;
  img.width = std::stoi(next_token());
  img.height = std::stoi(next_token());
  if (next_token() != "255") {
    throw FormatError(path.string() + ": only maxval 255 is supported");
  }
  std::size_t offset = static_cast<std::size_t>(in.tellg()) + 1;  // single whitespace
  std::size_t expected = static_cast<std::size_t>(img.width) * img.height * 3;
  if (data.size() < offset + expected) {
    throw FormatError(path.string() + ": truncated PPM payload");
  }
  img.data.assign(data.begin() + offset, data.begin() + offset + expected);
  return img;
}

// ---------------------------------------------------------------------------
// Odometry CSV: t,x,y,z,qx,qy,qz,qw (Hamilton quaternions, normalized on load)

inline void save_odometry_csv(const OdometryTrack& track, const std::filesystem::path& path) {
  std::string out = "t,x,y,z,qx,qy,qz,qw\n";
  for (const StampedPose& s : track.samples()) {
    Eigen::Quaterniond q(s.pose.rotation);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.pose.translation.x(), s.pose.translation.y(), s.pose.translation.z(),
                  q.x(), q.y(), q.z(), q.w());
    out += buf;
  }
  write_file(path, out);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

inline OdometryTrack load_odometry_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,z,qx,qy,qz,qw") {
    throw FormatError(path.string() + ": expected header t,x,y,z,qx,qy,qz,qw");
  }
  std::vector<StampedPose> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 8) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 8 fields");
    }
    try {
      Eigen::Quaterniond q(std::stod(f[7]), std::stod(f[4]), std::stod(f[5]), std::stod(f[6]));
      if (std::abs(q.norm() - 1.0) > 1e-6) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": quaternion norm deviates by more than 1e-6");
      }
      samples.push_back({std::stod(f[0]),
                         RigidTransform::from_quaternion(
                             q, {std::stod(f[1]), std::stod(f[2]), std::stod(f[3])})});
    } catch (const std::invalid_argument&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  if (samples.empty()) {
    throw FormatError(path.string() + ": no odometry samples");
  }
  return OdometryTrack(std::move(samples));
}

// ---------------------------------------------------------------------------
// Scan files: one JSON packet per line, grouped under `#SCAN <id>` sentinels

inline void save_scans(const std::vector<std::pair<std::string, LidarScan>>& scans,
                       const std::filesystem::path& path) {
  std::string out;
  for (const auto& [id, scan] : scans) {
    out += "#SCAN " + id + "\n";
    for (const LidarPacket& packet : scan.packets) {
      json points = json::array();
      for (const Point3& p : packet.points) {
        points.push_back({p.x(), p.y(), p.z()});
      }
      json line = {{"t", packet.t}, {"pts", std::move(points)}};
      out += line.dump() + "\n";
    }
  }
  write_file(path, out);
}

inline std::vector<std::pair<std::string, LidarScan>> load_scans(
    const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<std::string, LidarScan>> scans;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#SCAN ", 0) == 0) {
      scans.emplace_back(line.substr(6), LidarScan{});
      continue;
    }
    if (line[0] == '#') continue;
    if (scans.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": packet before any #SCAN sentinel");
    }
    json packet_json;
    try {
      packet_json = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!packet_json.contains("t") || !packet_json.contains("pts")) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": packet needs 't' and 'pts'");
    }
    LidarPacket packet;
    packet.t = packet_json["t"].get<double>();
    for (const auto& p : packet_json["pts"]) {
      if (!p.is_array() || p.size() != 3) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": points must be [x,y,z]");
      }
      packet.points.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    scans.back().second.packets.push_back(std::move(packet));
  }
  return scans;
}

// ---------------------------------------------------------------------------
// Calibration JSON

inline json transform_to_json(const RigidTransform& t) {
  json arr = json::array();
  Eigen::Matrix4d m = t.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
  }
  return arr;
}

inline RigidTransform transform_from_json(const json& arr, const std::string& origin) {
  if (!arr.is_array() || arr.size() != 16) {
    throw FormatError(origin + ": transform must hold 16 row-major reals");
  }
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = arr[4 * r + c].get<double>();
  }
  RigidTransform t = RigidTransform::from_matrix(m);
  if (!is_valid(t, 1e-6)) {
    throw FormatError(origin + ": rotation block is not orthonormal");
  }
  if (orthonormality_drift(t.rotation) > 1e-12) {
    t.rotation = orthonormalized(t.rotation);
  }
  return t;
}

inline void save_calibration(const CalibrationRig& rig, const std::filesystem::path& path) {
  json cameras = json::array();
  for (const CameraModel& cam : rig.cameras) {
    cameras.push_back({{"id", cam.id},
                       {"width", cam.width},
                       {"height", cam.height},
                       {"fx", cam.fx},
                       {"fy", cam.fy},
                       {"cx", cam.cx},
                       {"cy", cam.cy},
                       {"alpha", cam.alpha},
                       {"k1", cam.k1},
                       {"k2", cam.k2},
                       {"k3", cam.k3},
                       {"k4", cam.k4},
                       {"T_l_cn", transform_to_json(cam.T_l_cn)}});
  }
  json doc = {{"T_veh_l", transform_to_json(rig.T_veh_l)}, {"cameras", std::move(cameras)}};
  write_file(path, doc.dump(2) + "\n");
}

inline CalibrationRig load_calibration(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  CalibrationRig rig;
  if (!doc.contains("T_veh_l") || !doc.contains("cameras")) {
    throw FormatError(path.string() + ": calibration needs T_veh_l and cameras");
  }
  rig.T_veh_l = transform_from_json(doc["T_veh_l"], path.string() + " T_veh_l");
  for (const json& c : doc["cameras"]) {
    CameraModel cam;
    try {
      cam.id = c.at("id").get<std::string>();
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      cam.fx = c.at("fx").get<double>();
      cam.fy = c.at("fy").get<double>();
      cam.cx = c.at("cx").get<double>();
      cam.cy = c.at("cy").get<double>();
      cam.alpha = c.at("alpha").get<double>();
      cam.k1 = c.at("k1").get<double>();
      cam.k2 = c.at("k2").get<double>();
      cam.k3 = c.at("k3").get<double>();
      cam.k4 = c.at("k4").get<double>();
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": camera entry: " + e.what());
    }
    if (cam.fx <= 0 || cam.fy <= 0 || cam.width < 1 || cam.height < 1) {
      throw FormatError(path.string() + ": camera '" + cam.id + "' has invalid intrinsics");
    }
    cam.T_l_cn = transform_from_json(c.at("T_l_cn"), path.string() + " " + cam.id);
    rig.cameras.push_back(std::move(cam));
  }
  return rig;
}

// ---------------------------------------------------------------------------
// Ground-truth sidecar CSV: scan_id,point_index,class_id

using TruthMap = std::map<std::string, std::map<std::size_t, std::uint32_t>>;

inline void save_truth_csv(const TruthMap& truth, const std::filesystem::path& path) {
  std::string out = "scan_id,point_index,class_id\n";
  for (const auto& [scan_id, labels] : truth) {
    for (const auto& [index, class_id] : labels) {
      out += scan_id + "," + std::to_string(index) + "," + std::to_string(class_id) + "\n";
    }
  }
  write_file(path, out);
}

inline TruthMap load_truth_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "scan_id,point_index,class_id") {
    throw FormatError(path.string() + ": expected header scan_id,point_index,class_id");
  }
  TruthMap truth;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 3) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    try {
      truth[f[0]][static_cast<std::size_t>(std::stoull(f[1]))] =
          static_cast<std::uint32_t>(std::stoul(f[2]));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Semantic cloud CSV plus JSON sidecar

inline void save_semantic_cloud(const SemanticPointCloud& cloud, const VisibilityCounts& counts,
                                const std::filesystem::path& csv_path,
                                const std::filesystem::path& sidecar_path) {
  std::string out = "x,y,z,source_camera,u,v,argmax";
  for (const std::string& name : cloud.class_names) {
    out += ",p_" + name;
  }
  out += "\n";
  for (const SemanticPoint& p : cloud.points) {
    std::size_t argmax = 0;
    for (std::size_t c = 1; c < p.probs.size(); ++c) {
      if (p.probs[c] > p.probs[argmax]) argmax = c;
    }
    out += format_real(p.position.x()) + "," + format_real(p.position.y()) + "," +
           format_real(p.position.z()) + "," + p.source_camera + "," + format_real(p.pixel.u) +
           "," + format_real(p.pixel.v) + "," + cloud.class_names[argmax];
    for (double v : p.probs) {
      out += "," + format_real(v);
    }
    out += "\n";
  }
  write_file(csv_path, out);

  json indices = json::array();
  for (const SemanticPoint& p : cloud.points) indices.push_back(p.source_index);
  json sidecar = {{"class_names", cloud.class_names},
                  {"t_ref", cloud.t_ref},
                  {"counts",
                   {{"visible", counts.visible},
                    {"occluded", counts.occluded},
                    {"out_of_view", counts.out_of_view},
                    {"behind_camera", counts.behind_camera}}},
                  {"point_indices", std::move(indices)}};
  write_file(sidecar_path, sidecar.dump(2) + "\n");
}

struct LoadedCloud {
  SemanticPointCloud cloud;
  VisibilityCounts counts;
};

inline LoadedCloud load_semantic_cloud(const std::filesystem::path& csv_path,
                                       const std::filesystem::path& sidecar_path) {
  json sidecar;
  try {
    sidecar = json::parse(read_file(sidecar_path));
  } catch (const json::exception& e) {
    throw FormatError(sidecar_path.string() + ": " + e.what());
  }
  LoadedCloud out;
  try {
    out.cloud.class_names = sidecar.at("class_names").get<std::vector<std::string>>();
    out.cloud.t_ref = sidecar.at("t_ref").get<double>();
    const json& counts = sidecar.at("counts");
    out.counts.visible = counts.at("visible").get<std::size_t>();
    out.counts.occluded = counts.at("occluded").get<std::size_t>();
    out.counts.out_of_view = counts.at("out_of_view").get<std::size_t>();
    out.counts.behind_camera = counts.at("behind_camera").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(sidecar_path.string() + ": " + e.what());
  }
  std::vector<std::size_t> indices;
  if (sidecar.contains("point_indices")) {
    indices = sidecar["point_indices"].get<std::vector<std::size_t>>();
  }

  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(csv_path.string() + ": empty file");
  }
  const std::size_t classes = out.cloud.class_names.size();
  {
    std::string header = "x,y,z,source_camera,u,v,argmax";
    for (const std::string& name : out.cloud.class_names) header += ",p_" + name;
    if (line != header) {
      throw FormatError(csv_path.string() + ": header does not match the sidecar classes");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7 + classes) {
      throw FormatError(csv_path.string() + ":" + std::to_string(line_no) +
                        ": wrong field count");
    }
    SemanticPoint p;
    try {
      p.position = {std::stod(f[0]), std::stod(f[1]), std::stod(f[2])};
      p.source_camera = f[3];
      p.pixel = {std::stod(f[4]), std::stod(f[5])};
      for (std::size_t c = 0; c < classes; ++c) p.probs.push_back(std::stod(f[7 + c]));
    } catch (const std::exception&) {
      throw FormatError(csv_path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    p.source_index = out.cloud.points.size() < indices.size()
                         ? indices[out.cloud.points.size()]
                         : out.cloud.points.size();
    out.cloud.points.push_back(std::move(p));
  }
  if (!indices.empty() && indices.size() != out.cloud.points.size()) {
    throw FormatError(sidecar_path.string() + ": point_indices length mismatch");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class-merge spec JSON: {"map": {"<source>": "<target>"|"discard"}}

inline void save_merge_spec(const ClassMergeSpec& spec, const std::filesystem::path& path) {
  json doc = {{"map", spec.mapping}};
  write_file(path, doc.dump(2) + "\n");
}

inline ClassMergeSpec load_merge_spec(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.contains("map") || !doc["map"].is_object()) {
    throw FormatError(path.string() + ": merge spec needs a 'map' object");
  }
  ClassMergeSpec spec;
  for (const auto& [key, value] : doc["map"].items()) {
    if (!value.is_string()) {
      throw FormatError(path.string() + ": merge targets must be strings");
    }
    spec.mapping[key] = value.get<std::string>();
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Image index JSON: per-camera score maps / superpixels / probabilities with
// timestamps, plus the shared class list.

struct ImageEntry {
  std::string camera;
  double t = 0.0;
  std::string scoremap;     // paths relative to the index file; empty = absent
  std::string superpixels;
  std::string probimage;
  std::string image;        // PPM for on-the-fly SLIC
};

struct ImageIndex {
  std::vector<std::string> class_names;
  std::vector<ImageEntry> images;
  std::optional<GapSpec> gaps;  // dataset-recommended mask gaps
  std::filesystem::path base;   // directory of the index file
};

inline void save_image_index(const ImageIndex& index, const std::filesystem::path& path) {
  json images = json::array();
  for (const ImageEntry& e : index.images) {
    json entry = {{"camera", e.camera}, {"t", e.t}};
    if (!e.scoremap.empty()) entry["scoremap"] = e.scoremap;
    if (!e.superpixels.empty()) entry["superpixels"] = e.superpixels;
    if (!e.probimage.empty()) entry["probimage"] = e.probimage;
    if (!e.image.empty()) entry["image"] = e.image;
    images.push_back(std::move(entry));
  }
  json doc = {{"class_names", index.class_names}, {"images", std::move(images)}};
  if (index.gaps) {
    doc["gaps"] = {{"theta_v", index.gaps->theta_v_deg}, {"theta_h", index.gaps->theta_h_deg}};
  }
  write_file(path, doc.dump(2) + "\n");
}

inline ImageIndex load_image_index(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  ImageIndex index;
  index.base = path.parent_path();
  try {
    index.class_names = doc.at("class_names").get<std::vector<std::string>>();
    for (const json& e : doc.at("images")) {
      ImageEntry entry;
      entry.camera = e.at("camera").get<std::string>();
      entry.t = e.at("t").get<double>();
      entry.scoremap = e.value("scoremap", "");
      entry.superpixels = e.value("superpixels", "");
      entry.probimage = e.value("probimage", "");
      entry.image = e.value("image", "");
      index.images.push_back(std::move(entry));
    }
    if (doc.contains("gaps")) {
      index.gaps = GapSpec{doc["gaps"].at("theta_v").get<double>(),
                           doc["gaps"].at("theta_h").get<double>()};
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return index;
}

// ---------------------------------------------------------------------------
// Scene JSON for the synthetic generator

inline void save_scene(const SceneSpec& spec, const std::filesystem::path& path) {
  json prims = json::array();
  for (const Primitive& p : spec.primitives) {
    if (p.kind == Primitive::Kind::box) {
      prims.push_back({{"kind", "box"},
                       {"class", p.class_id},
                       {"min", {p.box_min.x(), p.box_min.y(), p.box_min.z()}},
                       {"max", {p.box_max.x(), p.box_max.y(), p.box_max.z()}}});
    } else {
      prims.push_back({{"kind", "wall"},
                       {"class", p.class_id},
                       {"a", {p.wall_a.x(), p.wall_a.y()}},
                       {"b", {p.wall_b.x(), p.wall_b.y()}},
                       {"z0", p.wall_z0},
                       {"z1", p.wall_z1}});
    }
  }
  json cameras = json::array();
  for (const CameraModel& cam : spec.cameras) {
    cameras.push_back({{"id", cam.id},
                       {"width", cam.width},
                       {"height", cam.height},
                       {"fx", cam.fx},
                       {"fy", cam.fy},
                       {"cx", cam.cx},
                       {"cy", cam.cy},
                       {"alpha", cam.alpha},
                       {"k1", cam.k1},
                       {"k2", cam.k2},
                       {"k3", cam.k3},
                       {"k4", cam.k4},
                       {"T_l_cn", transform_to_json(cam.T_l_cn)}});
  }
  json doc = {
      {"class_names", spec.class_names},
      {"primitives", std::move(prims)},
      {"lidar",
       {{"beam_count", spec.lidar.beam_count},
        {"elev_min_deg", spec.lidar.elev_min_deg},
        {"elev_max_deg", spec.lidar.elev_max_deg},
        {"azimuth_step_deg", spec.lidar.azimuth_step_deg},
        {"azimuth_start_deg", spec.lidar.azimuth_start_deg},
        {"sweep_rate_hz", spec.lidar.sweep_rate_hz},
        {"azimuth_per_packet_deg", spec.lidar.azimuth_per_packet_deg},
        {"max_range", spec.lidar.max_range}}},
      {"trajectory",
       {{"kind",
         spec.trajectory.kind == Trajectory::Kind::constant_velocity ? "constant_velocity"
                                                                     : "constant_turn"},
        {"x0", spec.trajectory.x0},
        {"y0", spec.trajectory.y0},
        {"yaw0_deg", spec.trajectory.yaw0_deg},
        {"speed", spec.trajectory.speed},
        {"yaw_rate_deg", spec.trajectory.yaw_rate_deg}}},
      {"T_veh_l", transform_to_json(spec.T_veh_l)},
      {"cameras", std::move(cameras)},
      {"t0", spec.t0},
      {"t_ref", spec.t_ref},
      {"seed", spec.seed},
      {"noise_sigma", spec.noise_sigma},
  };
  write_file(path, doc.dump(2) + "\n");
}

inline SceneSpec load_scene(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  SceneSpec spec;
  try {
    spec.class_names = doc.at("class_names").get<std::vector<std::string>>();
    for (const json& p : doc.at("primitives")) {
      const std::string kind = p.at("kind").get<std::string>();
      const auto class_id = p.at("class").get<std::uint32_t>();
      if (class_id >= spec.class_names.size()) {
        throw FormatError(path.string() + ": primitive class outside class_names");
      }
      if (kind == "box") {
        const auto lo = p.at("min");
        const auto hi = p.at("max");
        spec.primitives.push_back(Primitive::box(
            class_id, {lo[0].get<double>(), lo[1].get<double>(), lo[2].get<double>()},
            {hi[0].get<double>(), hi[1].get<double>(), hi[2].get<double>()}));
      } else if (kind == "wall") {
        const auto a = p.at("a");
        const auto b = p.at("b");
        spec.primitives.push_back(Primitive::wall(
            class_id, {a[0].get<double>(), a[1].get<double>()},
            {b[0].get<double>(), b[1].get<double>()}, p.at("z0").get<double>(),
            p.at("z1").get<double>()));
      } else {
        throw FormatError(path.string() + ": unknown primitive kind '" + kind + "'");
      }
    }
    if (doc.contains("lidar")) {
      const json& l = doc["lidar"];
      spec.lidar.beam_count = l.value("beam_count", spec.lidar.beam_count);
      spec.lidar.elev_min_deg = l.value("elev_min_deg", spec.lidar.elev_min_deg);
      spec.lidar.elev_max_deg = l.value("elev_max_deg", spec.lidar.elev_max_deg);
      spec.lidar.azimuth_step_deg = l.value("azimuth_step_deg", spec.lidar.azimuth_step_deg);
      spec.lidar.azimuth_start_deg =
          l.value("azimuth_start_deg", spec.lidar.azimuth_start_deg);
      spec.lidar.sweep_rate_hz = l.value("sweep_rate_hz", spec.lidar.sweep_rate_hz);
      spec.lidar.azimuth_per_packet_deg =
          l.value("azimuth_per_packet_deg", spec.lidar.azimuth_per_packet_deg);
      spec.lidar.max_range = l.value("max_range", spec.lidar.max_range);
    }
    if (doc.contains("trajectory")) {
      const json& t = doc["trajectory"];
      const std::string kind = t.value("kind", "constant_velocity");
      if (kind == "constant_velocity") {
        spec.trajectory.kind = Trajectory::Kind::constant_velocity;
      } else if (kind == "constant_turn") {
        spec.trajectory.kind = Trajectory::Kind::constant_turn;
      } else {
        throw FormatError(path.string() + ": unknown trajectory kind '" + kind + "'");
      }
      spec.trajectory.x0 = t.value("x0", 0.0);
      spec.trajectory.y0 = t.value("y0", 0.0);
      spec.trajectory.yaw0_deg = t.value("yaw0_deg", 0.0);
      spec.trajectory.speed = t.value("speed", 0.0);
      spec.trajectory.yaw_rate_deg = t.value("yaw_rate_deg", 0.0);
    }
    if (doc.contains("T_veh_l")) {
      spec.T_veh_l = transform_from_json(doc["T_veh_l"], path.string() + " T_veh_l");
    }
    for (const json& c : doc.value("cameras", json::array())) {
      CameraModel cam;
      cam.id = c.at("id").get<std::string>();
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      cam.fx = c.at("fx").get<double>();
      cam.fy = c.at("fy").get<double>();
      cam.cx = c.at("cx").get<double>();
      cam.cy = c.at("cy").get<double>();
      cam.alpha = c.value("alpha", 0.0);
      cam.k1 = c.value("k1", 0.0);
      cam.k2 = c.value("k2", 0.0);
      cam.k3 = c.value("k3", 0.0);
      cam.k4 = c.value("k4", 0.0);
      cam.T_l_cn = transform_from_json(c.at("T_l_cn"), path.string() + " " + cam.id);
      spec.cameras.push_back(std::move(cam));
    }
    spec.t0 = doc.value("t0", 0.0);
    spec.t_ref = doc.value("t_ref", spec.t0 + 0.5 * spec.sweep_period());
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.noise_sigma = doc.value("noise_sigma", 0.0);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Evaluation reports

inline json report_to_json(const EvalReport& report) {
  json classes = json::array();
  for (const ClassMetrics& m : report.per_class) {
    classes.push_back({{"name", m.name},
                       {"tp", m.tp},
                       {"fp", m.fp},
                       {"fn", m.fn},
                       {"recall", m.recall},
                       {"precision", m.precision},
                       {"f1", m.f1}});
  }
  return {{"method", report.method},
          {"averaging", report.averaging},
          {"evaluated_predictions", report.evaluated_predictions},
          {"truth_points", report.truth_points},
          {"classes", std::move(classes)}};
}

inline std::string format_report_table(const EvalReport& report) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-18s %8s %10s %8s\n", ("[" + report.method + "]").c_str(),
                "Recall", "Precision", "F1");
  out += buf;
  for (const ClassMetrics& m : report.per_class) {
    std::snprintf(buf, sizeof(buf), "%-18s %8.3f %10.3f %8.3f\n", m.name.c_str(), m.recall,
                  m.precision, m.f1);
    out += buf;
  }
  return out;
}

/// Three-method comparison in the single-scan-evaluation layout.
inline std::string format_ablation_table(const EvalReport& direct, const EvalReport& motion,
                                         const EvalReport& full) {
  char buf[240];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-18s | %-26s | %-26s | %-26s\n", "", "Direct Projection",
                "Projection + Motion C", "Projection + Motion C + Mask");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-18s | %8s %9s %6s | %8s %9s %6s | %8s %9s %6s\n",
                "Semantic class", "Recall", "Precision", "F1", "Recall", "Precision", "F1",
                "Recall", "Precision", "F1");
  out += buf;
  out += std::string(18, '-') + "-+-" + std::string(26, '-') + "-+-" + std::string(26, '-') +
         "-+-" + std::string(26, '-') + "\n";
  for (std::size_t k = 0; k < full.per_class.size(); ++k) {
    std::snprintf(buf, sizeof(buf),
                  "%-18s | %8.3f %9.3f %6.3f | %8.3f %9.3f %6.3f | %8.3f %9.3f %6.3f\n",
                  full.per_class[k].name.c_str(), direct.per_class[k].recall,
                  direct.per_class[k].precision, direct.per_class[k].f1,
                  motion.per_class[k].recall, motion.per_class[k].precision,
                  motion.per_class[k].f1, full.per_class[k].recall,
                  full.per_class[k].precision, full.per_class[k].f1);
    out += buf;
  }
  return out;
}

}  // namespace io

}  // namespace semfuse
