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

#include <random>

#include "semfuse/occlusion.hpp"
#include "semfuse/synthscene.hpp"

namespace semfuse {

/// Mask gaps matched to a synthetic lidar's angular resolution, with a small
/// margin so camera-lidar parallax cannot open strips between adjacent masks.
inline GapSpec recommended_gaps(const LidarRig& rig) {
  const double elev_step = rig.beam_count > 1
      ? (rig.elev_max_deg - rig.elev_min_deg) / (rig.beam_count - 1)
      : 1.0;
  return {1.15 * elev_step, 1.15 * rig.azimuth_step_deg};
}

/// Static walls around a moving vehicle; exercises motion correction and the
/// plane-fit checks. `turning` selects the constant-yaw-rate trajectory.
inline SceneSpec make_motion_scene(bool turning) {
  SceneSpec s;
  s.class_names = {"unlabeled", "road", "building"};
  s.primitives = {
      Primitive::box(1, {-40, -40, -0.2}, {60, 40, 0.0}),
      Primitive::wall(2, {20, -15}, {20, 15}, 0.0, 4.0),
      Primitive::wall(2, {-15, -20}, {25, -20}, 0.0, 4.0),
      Primitive::wall(2, {-15, 18}, {25, 18}, 0.0, 4.0),
  };
  s.T_veh_l = RigidTransform::from_translation(0, 0, 1.9);
  s.trajectory.kind =
      turning ? Trajectory::Kind::constant_turn : Trajectory::Kind::constant_velocity;
  s.trajectory.speed = turning ? 3.0 : 5.0;
  s.trajectory.yaw_rate_deg = turning ? 20.0 : 0.0;
  s.lidar.azimuth_step_deg = 0.4;
  s.t0 = 0.0;
  s.t_ref = 0.05;
  s.cameras = {make_camera("front", {0.4, -0.35, 1.15}, 0.0, s.T_veh_l)};
  return s;
}

/// Two parallel walls: the near one hides a band of the far one from the
/// camera while the lidar sees over it. Deterministic occlusion fixture.
inline SceneSpec make_two_wall_scene() {
  SceneSpec s;
  s.class_names = {"unlabeled", "near_wall", "far_wall"};
  s.primitives = {
      Primitive::wall(1, {4, -4}, {4, 4}, 0.0, 2.6),
      Primitive::wall(2, {10, -4}, {10, 4}, 0.0, 4.0),
  };
  s.T_veh_l = RigidTransform::from_translation(0, 0, 1.9);
  s.lidar.azimuth_step_deg = 0.4;
  s.t0 = 0.0;
  s.t_ref = 0.05;
  s.cameras = {make_camera("front", {0.45, 0, 1.15}, 0.0, s.T_veh_l)};
  return s;
}

/// Randomized near/far wall pairs plus small boxes, viewed by a front camera
/// and a side-mounted one; the seeded family behind the oracle-agreement runs.
inline SceneSpec make_occlusion_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 12345);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SceneSpec s;
  s.seed = seed;
  s.class_names = {"unlabeled", "ground", "near_wall", "far_wall", "box"};
  s.T_veh_l = RigidTransform::from_translation(0, 0, 1.9);
  s.lidar.azimuth_step_deg = 0.4;
  s.t0 = 0.0;
  s.t_ref = 0.05;

  const double bearing = uniform(-20.0, 20.0) * kDegToRad;
  const Eigen::Vector2d fwd(std::cos(bearing), std::sin(bearing));
  const Eigen::Vector2d side(-std::sin(bearing), std::cos(bearing));

  s.primitives.push_back(Primitive::box(1, {-30, -30, -0.2}, {40, 40, 0.0}));
  const double near_dist = uniform(4.0, 6.0);
  const double near_half = uniform(2.5, 4.5);
  const double near_top = uniform(2.2, 2.6);
  Eigen::Vector2d nc = near_dist * fwd;
  s.primitives.push_back(
      Primitive::wall(2, nc - near_half * side, nc + near_half * side, 0.0, near_top));
  const double far_dist = near_dist + uniform(3.5, 7.0);
  const double far_half = near_half * uniform(1.4, 1.9);
  Eigen::Vector2d fc = far_dist * fwd;
  s.primitives.push_back(
      Primitive::wall(3, fc - far_half * side, fc + far_half * side, 0.0,
                      uniform(3.4, 3.8)));
  // Boxes sit between the walls, raised into the beam fan so the lidar
  // samples their whole camera-facing silhouette (unsampled surface cannot
  // stamp masks).
  const double lidar_z = 1.9;
  const int boxes = 1 + static_cast<int>(seed % 3);
  for (int i = 0; i < boxes; ++i) {
    const double d = uniform(near_dist + 1.2, far_dist - 1.5);
    const double lateral = uniform(-0.6, 0.6) * near_half;
    const double half = uniform(0.2, 0.5);
    const double z0 = std::max(0.0, lidar_z - (d - half) * std::tan(13.5 * kDegToRad));
    const double top = z0 + uniform(0.8, 1.3);
    Eigen::Vector2d c = d * fwd + lateral * side;
    s.primitives.push_back(Primitive::box(
        4, {c.x() - half, c.y() - half, z0}, {c.x() + half, c.y() + half, top}));
  }

  const double bearing_deg = bearing / kDegToRad;
  s.cameras = {
      make_camera("front", {0.4, -0.3, uniform(1.0, 1.3)}, bearing_deg, s.T_veh_l),
      make_camera("side", {-0.1, 0.45, uniform(1.05, 1.25)}, bearing_deg + uniform(-10.0, 10.0),
                  s.T_veh_l),
  };
  return s;
}

/// The standard moving urban-like scene: thin poles, pedestrian- and
/// vehicle-sized boxes, a hedge, a low barrier, and a backdrop wall, swept at
/// 5 m/s. The camera sits below and beside the lidar so the lidar sees over
/// the barrier and hedge onto surfaces the camera cannot; the barrier's
/// shadow stays clear of the wall so everything occluded behind it is road.
inline SceneSpec make_standard_scene() {
  SceneSpec s;
  s.class_names = {"unlabeled", "road", "building", "pole", "pedestrian", "vehicle",
                   "vegetation"};
  s.primitives = {
      Primitive::box(1, {-40, -40, -0.2}, {60, 40, 0.0}),       // ground
      Primitive::box(2, {7, -6, -0.21}, {25, 6, 0.01}),         // paved plaza slab
      Primitive::wall(2, {25, -4}, {25, 12}, 0.0, 5.0),         // frontal wall
      Primitive::box(6, {13.3, 4.2, 0}, {14.5, 5.2, 2.0}),      // bush
      Primitive::box(5, {18, -2.6, 0}, {22, -0.8, 1.5}),        // parked vehicle
      Primitive::wall(2, {5, -1.8}, {8, -5.5}, 0.0, 1.5),       // low barrier
      Primitive::box(6, {26, -17, 0}, {26.5, -4.3, 1.6}),       // roadside shrubs
      Primitive::box(6, {26, -17, 2.6}, {26.5, -4.3, 3.8}),     // tree canopy above them
  };
  const double pole_half = 0.075;
  for (auto [px, py] : {std::pair{10.0, -2.6}, {12.0, 1.0}, {14.0, 0.2}, {9.0, 2.2}}) {
    s.primitives.push_back(Primitive::box(3, {px - pole_half, py - pole_half, 0.0},
                                          {px + pole_half, py + pole_half, 3.0}));
  }
  const double ped_half = 0.175;
  for (auto [px, py] : {std::pair{8.0, 0.5}, {10.5, 2.1}, {10.0, 1.2}}) {
    s.primitives.push_back(Primitive::box(4, {px - ped_half, py - ped_half, 0.0},
                                          {px + ped_half, py + ped_half, 1.85}));
  }
  s.T_veh_l = RigidTransform::from_translation(0, 0, 1.9);
  s.trajectory.kind = Trajectory::Kind::constant_velocity;
  s.trajectory.speed = 5.0;
  s.lidar.azimuth_step_deg = 0.4;
  // The sweep wraps at the right rear, outside the camera sector, so the wrap
  // seam's doubled rings cannot shadow each other in the image; the camera
  // sector is then sampled well before t_ref, which keeps the uncorrected
  // misalignment strong.
  s.lidar.azimuth_start_deg = 315.0;
  s.t0 = 0.0;
  s.t_ref = 0.05;
  s.cameras = {make_camera("front", {0.4, -0.35, 1.45}, 0.0, s.T_veh_l)};
  return s;
}

}  // namespace semfuse
