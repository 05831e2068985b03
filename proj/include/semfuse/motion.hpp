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

#include <algorithm>
#include <string>
#include <vector>

#include "semfuse/errors.hpp"
#include "semfuse/geometry.hpp"

namespace semfuse {

/// One timestamped block of lidar returns in the lidar frame.
struct LidarPacket {
  double t = 0.0;
  std::vector<Point3> points;
};

/// A full sweep, ordered by packet timestamp.
struct LidarScan {
  std::vector<LidarPacket> packets;
  double sweep_period = 0.1;

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& p : packets) n += p.points.size();
    return n;
  }
};

struct MotionCorrectionConfig {
  double t_ref = 0.0;
  RigidTransform T_veh_l;  // lidar pose in the vehicle footprint frame
  InterpolationMode mode = InterpolationMode::nearest;
  // Packets this close outside odometry coverage clamp to the boundary pose;
  // anything further is an error (real logs truncate at the edges).
  double clamp_slack = 0.010;
};

/// Re-expresses one packet in the lidar frame at cfg.t_ref:
/// p' = T_veh_l^-1 * M * T_veh_l * p with M the vehicle ego-motion between
/// t_ref and the packet timestamp.
inline LidarPacket correct_packet(const LidarPacket& packet, const OdometryTrack& track,
                                  const MotionCorrectionConfig& cfg) {
  double t_i = packet.t;
  if (t_i < track.first_time()) {
    if (track.first_time() - t_i > cfg.clamp_slack) {
      throw TimestampOutOfRange("packet at t=" + std::to_string(t_i) +
                                " precedes odometry coverage");
    }
    t_i = track.first_time();
  } else if (t_i > track.last_time()) {
    if (t_i - track.last_time() > cfg.clamp_slack) {
      throw TimestampOutOfRange("packet at t=" + std::to_string(t_i) +
                                " exceeds odometry coverage");
    }
    t_i = track.last_time();
  }
  const RigidTransform ego = ego_motion_between(track, cfg.t_ref, t_i, cfg.mode);
  const RigidTransform full = compose(invert(cfg.T_veh_l), compose(ego, cfg.T_veh_l));
  LidarPacket out;
  out.t = packet.t;
  out.points.reserve(packet.points.size());
  for (const Point3& p : packet.points) {
    out.points.push_back(apply(full, p));
  }
  return out;
}

/// Packet-wise correction of a whole sweep; order and point count preserved.
inline LidarScan correct_scan(const LidarScan& scan, const OdometryTrack& track,
                              const MotionCorrectionConfig& cfg) {
  LidarScan out;
  out.sweep_period = scan.sweep_period;
  out.packets.reserve(scan.packets.size());
  for (const LidarPacket& packet : scan.packets) {
    out.packets.push_back(correct_packet(packet, track, cfg));
  }
  return out;
}

/// Midpoint of the packet timestamp span; reference selection uses the image
/// timestamp nearest to this.
inline double scan_midpoint(const LidarScan& scan) {
  if (scan.packets.empty()) return 0.0;
  return 0.5 * (scan.packets.front().t + scan.packets.back().t);
}

}  // namespace semfuse
