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

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semfuse/camera.hpp"
#include "semfuse/errors.hpp"
#include "semfuse/geometry.hpp"
#include "semfuse/motion.hpp"
#include "semfuse/semantics.hpp"

namespace semfuse {

constexpr double kDegToRad = std::numbers::pi / 180.0;

/// Scene geometry with closed-form ray intersections: axis-aligned boxes and
/// vertical quads (walls) over an arbitrary base segment.
struct Primitive {
  enum class Kind { box, wall };
  Kind kind = Kind::box;
  std::uint32_t class_id = 0;

  Point3 box_min = Point3::Zero();
  Point3 box_max = Point3::Zero();

  Eigen::Vector2d wall_a = Eigen::Vector2d::Zero();
  Eigen::Vector2d wall_b = Eigen::Vector2d::Zero();
  double wall_z0 = 0, wall_z1 = 0;

  static Primitive box(std::uint32_t class_id, const Point3& lo, const Point3& hi) {
    Primitive p;
    p.kind = Kind::box;
    p.class_id = class_id;
    p.box_min = lo;
    p.box_max = hi;
    return p;
  }

  static Primitive wall(std::uint32_t class_id, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b, double z0, double z1) {
    Primitive p;
    p.kind = Kind::wall;
    p.class_id = class_id;
    p.wall_a = a;
    p.wall_b = b;
    p.wall_z0 = z0;
    p.wall_z1 = z1;
    return p;
  }
};

/// Distance along the ray to the primitive, or infinity on a miss.
inline double intersect(const Primitive& prim, const Point3& origin, const Point3& dir) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kMin = 1e-9;
  if (prim.kind == Primitive::Kind::box) {
    double t0 = kMin, t1 = kInf;
    for (int axis = 0; axis < 3; ++axis) {
      double o = origin[axis], d = dir[axis];
      double lo = prim.box_min[axis], hi = prim.box_max[axis];
      if (std::abs(d) < 1e-15) {
        if (o < lo || o > hi) return kInf;
        continue;
      }
      double ta = (lo - o) / d, tb = (hi - o) / d;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return kInf;
    }
    return t0 > kMin ? t0 : (t1 > kMin ? t1 : kInf);
  }
  // Vertical quad through the base segment.
  Eigen::Vector2d edge = prim.wall_b - prim.wall_a;
  Point3 normal(edge.y(), -edge.x(), 0.0);
  double denom = normal.dot(dir);
  if (std::abs(denom) < 1e-15) return kInf;
  Point3 anchor(prim.wall_a.x(), prim.wall_a.y(), 0.0);
  double t = normal.dot(anchor - origin) / denom;
  if (t <= kMin) return kInf;
  Point3 hit = origin + t * dir;
  if (hit.z() < prim.wall_z0 || hit.z() > prim.wall_z1) return kInf;
  double len2 = edge.squaredNorm();
  if (len2 < 1e-15) return kInf;
  double s = (Eigen::Vector2d(hit.x(), hit.y()) - prim.wall_a).dot(edge) / len2;
  if (s < 0.0 || s > 1.0) return kInf;
  return t;
}

/// Spinning multi-beam lidar: evenly spaced elevations, fixed azimuth step.
struct LidarRig {
  int beam_count = 16;
  double elev_min_deg = -15.0;
  double elev_max_deg = 15.0;
  double azimuth_step_deg = 0.2;
  double azimuth_start_deg = 0.0;  // where the sweep begins and wraps
  double sweep_rate_hz = 10.0;
  double azimuth_per_packet_deg = 12.0;
  double max_range = 120.0;
};

/// Analytic vehicle trajectory on the ground plane.
struct Trajectory {
  enum class Kind { constant_velocity, constant_turn };
  Kind kind = Kind::constant_velocity;
  double x0 = 0, y0 = 0;
  double yaw0_deg = 0;
  double speed = 0;         // m/s along the heading
  double yaw_rate_deg = 0;  // deg/s, constant_turn only

  RigidTransform pose_at(double t) const {
    const double yaw0 = yaw0_deg * kDegToRad;
    const double omega = yaw_rate_deg * kDegToRad;
    if (kind == Kind::constant_velocity || std::abs(omega) < 1e-12) {
      return RigidTransform::from_yaw(
          yaw0, {x0 + speed * t * std::cos(yaw0), y0 + speed * t * std::sin(yaw0), 0.0});
    }
    const double yaw = yaw0 + omega * t;
    return RigidTransform::from_yaw(
        yaw, {x0 + speed / omega * (std::sin(yaw) - std::sin(yaw0)),
              y0 - speed / omega * (std::cos(yaw) - std::cos(yaw0)), 0.0});
  }
};

/// Complete synthetic-scene description; the verification oracle for motion,
/// occlusion, and fusion. Class 0 labels pixels with no geometry behind them.
struct SceneSpec {
  std::vector<std::string> class_names;
  std::vector<Primitive> primitives;
  LidarRig lidar;
  Trajectory trajectory;
  RigidTransform T_veh_l;
  std::vector<CameraModel> cameras;
  double t0 = 0.0;     // sweep start
  double t_ref = 0.0;  // camera image timestamp
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;

  double sweep_period() const { return 1.0 / lidar.sweep_rate_hz; }
};

/// Nearest hit across all primitives; returns distance and fills the class id.
inline double cast_ray(std::span<const Primitive> primitives, const Point3& origin,
                       const Point3& dir, std::uint32_t* class_id = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : primitives) {
    double t = intersect(prim, origin, dir);
    if (t < best) {
      best = t;
      if (class_id) *class_id = prim.class_id;
    }
  }
  return best;
}

struct SimulatedScan {
  LidarScan scan;
  std::vector<std::uint32_t> truth;    // class per point, flattened scan order
  std::vector<Point3> static_cloud;    // hit points in the world frame
};

/// Simulates one sweep: rays cast from the instantaneous lidar pose, one
/// packet per azimuth block, so the returned scan carries motion distortion
/// exactly consistent with the trajectory.
inline SimulatedScan simulate_scan(const SceneSpec& spec) {
  const LidarRig& rig = spec.lidar;
  const double period = spec.sweep_period();
  const int total_cols = static_cast<int>(std::lround(360.0 / rig.azimuth_step_deg));
  const int cols_per_packet =
      std::max(1, static_cast<int>(std::lround(rig.azimuth_per_packet_deg /
                                               rig.azimuth_step_deg)));
  const double elev_step = rig.beam_count > 1
      ? (rig.elev_max_deg - rig.elev_min_deg) / (rig.beam_count - 1)
      : 0.0;

  SimulatedScan out;
  out.scan.sweep_period = period;
  std::uint64_t ray_index = 0;
  for (int col0 = 0; col0 < total_cols; col0 += cols_per_packet) {
    LidarPacket packet;
    packet.t = spec.t0 + (static_cast<double>(col0) / total_cols) * period;
    const RigidTransform world_T_l = compose(spec.trajectory.pose_at(packet.t), spec.T_veh_l);
    const Point3 origin = world_T_l.translation;
    for (int col = col0; col < std::min(col0 + cols_per_packet, total_cols); ++col) {
      const double az = (rig.azimuth_start_deg + col * rig.azimuth_step_deg) * kDegToRad;
      for (int beam = 0; beam < rig.beam_count; ++beam, ++ray_index) {
        const double elev = (rig.elev_min_deg + beam * elev_step) * kDegToRad;
        const Point3 dir_l(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az),
                           std::sin(elev));
        const Point3 dir_w = world_T_l.rotation * dir_l;
        std::uint32_t class_id = 0;
        const double range = cast_ray(spec.primitives, origin, dir_w, &class_id);
        if (!(range <= rig.max_range)) continue;
        Point3 p_l = range * dir_l;
        if (spec.noise_sigma > 0.0) {
          // Per-ray stream so generation is order- and thread-independent.
          std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + ray_index);
          std::normal_distribution<double> n(0.0, spec.noise_sigma);
          p_l += Point3(n(rng), n(rng), n(rng));
        }
        packet.points.push_back(p_l);
        out.truth.push_back(class_id);
        out.static_cloud.push_back(apply(world_T_l, p_l));
      }
    }
    out.scan.packets.push_back(std::move(packet));
  }
  if (out.static_cloud.empty()) {
    throw NoHits("no ray hit any primitive");
  }
  return out;
}

/// Camera pose in the world frame at the scene's reference time.
inline RigidTransform world_from_camera(const SceneSpec& spec, const CameraModel& model) {
  return compose(compose(spec.trajectory.pose_at(spec.t_ref), spec.T_veh_l),
                 invert(model.T_l_cn));
}

/// Numeric inverse of the fisheye projection: the camera-frame unit direction
/// seen at a pixel, or nothing when the radius lies outside the lens range.
/// Assumes theta -> theta_d is monotone over [0, 89 deg].
inline std::optional<Point3> unproject_direction(const PixelCoord& px, const CameraModel& model) {
  const double yp = (px.v - model.cy) / model.fy;
  const double xp = (px.u - model.cx) / model.fx - model.alpha * yp;
  const double rd = std::hypot(xp, yp);
  if (rd < 1e-12) {
    return Point3(0, 0, 1);
  }
  auto distorted = [&](double theta) {
    const double t2 = theta * theta;
    return theta *
           (1.0 + t2 * (model.k1 + t2 * (model.k2 + t2 * (model.k3 + t2 * model.k4))));
  };
  double lo = 0.0, hi = 89.0 * kDegToRad;
  if (rd > distorted(hi)) {
    return std::nullopt;
  }
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (distorted(mid) < rd ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const double r = std::tan(theta);
  const double scale = r / rd;
  return Point3(xp * scale, yp * scale, 1.0).normalized();
}

struct RenderedView {
  LabelImage labels;
  ScoreMap scores;
};

/// Renders the scene through the fisheye model: per pixel, cast the inverse
/// ray and record the nearest primitive's class; the score map carries
/// peak_score on the true class and 0 elsewhere.
inline RenderedView render_semantic_image(const SceneSpec& spec, const CameraModel& model,
                                          float peak_score) {
  const int classes = static_cast<int>(spec.class_names.size());
  const RigidTransform world_T_cam = world_from_camera(spec, model);
  RenderedView view;
  view.labels = LabelImage{classes, model.height, model.width, {}};
  view.labels.labels.assign(static_cast<std::size_t>(model.height) * model.width, 0);
  view.scores = ScoreMap::zeros(classes, model.height, model.width);
  for (int y = 0; y < model.height; ++y) {
    for (int x = 0; x < model.width; ++x) {
      std::uint32_t class_id = 0;
      auto dir_cam = unproject_direction({static_cast<double>(x), static_cast<double>(y)}, model);
      if (dir_cam) {
        const Point3 dir_w = world_T_cam.rotation * (*dir_cam);
        std::uint32_t hit_class = 0;
        const double range = cast_ray(spec.primitives, world_T_cam.translation, dir_w,
                                      &hit_class);
        if (std::isfinite(range)) class_id = hit_class;
      }
      view.labels.at(y, x) = class_id;
      view.scores.at(static_cast<int>(class_id), y, x) = peak_score;
    }
  }
  return view;
}

/// Brute-force visibility ground truth: a camera-frame point is visible iff
/// the segment from the camera origin hits no primitive strictly before it
/// (1e-6 m tolerance) and it projects inside the image.
inline std::vector<std::uint8_t> visibility_oracle(std::span<const Point3> points_cam,
                                                   const SceneSpec& spec,
                                                   const CameraModel& model) {
  const RigidTransform world_T_cam = world_from_camera(spec, model);
  std::vector<std::uint8_t> visible(points_cam.size(), 0);
  for (std::size_t i = 0; i < points_cam.size(); ++i) {
    const Point3& p = points_cam[i];
    if (p.z() <= 0.0) continue;
    if (!in_image(project(p, model), model)) continue;
    const double dist = p.norm();
    if (dist < 1e-9) continue;
    const Point3 dir_w = world_T_cam.rotation * (p / dist);
    const double hit = cast_ray(spec.primitives, world_T_cam.translation, dir_w);
    visible[i] = hit >= dist - 1e-6 ? 1 : 0;
  }
  return visible;
}

/// Odometry sampled at every packet timestamp, a 100 Hz grid, and t_ref, so
/// interpolated lookups at exact sample times reproduce the trajectory.
inline OdometryTrack sample_odometry(const SceneSpec& spec) {
  const double period = spec.sweep_period();
  std::vector<double> times;
  const double start = std::min(spec.t0, spec.t_ref) - 0.02;
  const double stop = std::max(spec.t0 + period, spec.t_ref) + 0.02;
  for (double t = start; t <= stop + 1e-12; t += 0.01) {
    times.push_back(t);
  }
  const int total_cols = static_cast<int>(std::lround(360.0 / spec.lidar.azimuth_step_deg));
  const int cols_per_packet =
      std::max(1, static_cast<int>(std::lround(spec.lidar.azimuth_per_packet_deg /
                                               spec.lidar.azimuth_step_deg)));
  for (int col0 = 0; col0 < total_cols; col0 += cols_per_packet) {
    times.push_back(spec.t0 + (static_cast<double>(col0) / total_cols) * period);
  }
  times.push_back(spec.t_ref);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              times.end());
  std::vector<StampedPose> samples;
  samples.reserve(times.size());
  for (double t : times) {
    samples.push_back({t, spec.trajectory.pose_at(t)});
  }
  return OdometryTrack(std::move(samples));
}

/// Camera looking along `view_yaw_deg` in the vehicle frame (0 = forward),
/// with the usual optical convention: z forward, x right, y down.
inline CameraModel make_camera(const std::string& id, const Point3& position_veh,
                               double view_yaw_deg, const RigidTransform& T_veh_l,
                               int width = 640, int height = 480, double f = 600.0) {
  CameraModel cam;
  cam.id = id;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = f;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  const double yaw = view_yaw_deg * kDegToRad;
  const Point3 forward(std::cos(yaw), std::sin(yaw), 0.0);
  const Point3 right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Point3 down(0.0, 0.0, -1.0);
  Eigen::Matrix3d cam_R_veh;
  cam_R_veh.row(0) = right.transpose();
  cam_R_veh.row(1) = down.transpose();
  cam_R_veh.row(2) = forward.transpose();
  RigidTransform cam_T_veh{cam_R_veh, -(cam_R_veh * position_veh)};
  cam.T_l_cn = compose(cam_T_veh, T_veh_l);
  return cam;
}

}  // namespace semfuse
