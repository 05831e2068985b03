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
#include <string>
#include <vector>

#include "semfuse/errors.hpp"
#include "semfuse/geometry.hpp"

namespace semfuse {

/// Fisheye camera intrinsics (equidistant model with polynomial distortion)
/// plus the lidar-to-camera extrinsic transform.
struct CameraModel {
  std::string id;
  int width = 0;
  int height = 0;
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  double alpha = 0;  // skew
  double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
  RigidTransform T_l_cn;  // lidar frame -> camera frame
};

/// Full sensor rig: lidar mount on the vehicle footprint plus all cameras.
struct CalibrationRig {
  RigidTransform T_veh_l;  // lidar frame -> vehicle footprint frame
  std::vector<CameraModel> cameras;
};

/// Sub-pixel image coordinates.
struct PixelCoord {
  double u = 0;
  double v = 0;
};

inline Point3 to_camera_frame(const Point3& p_lidar, const CameraModel& model) {
  return apply(model.T_l_cn, p_lidar);
}

/// Projects a camera-frame point to pixel coordinates: pinhole normalization,
/// incidence angle theta = atan(r), polynomial radial distortion on theta, and
/// skewed focal scaling. The r -> 0 limit of theta_d/r is 1.
inline PixelCoord project(const Point3& p_cam, const CameraModel& model) {
  const double z = p_cam.z();
  if (z <= 0.0) {
    throw BehindCamera("point has non-positive camera-frame depth");
  }
  const double a = p_cam.x() / z;
  const double b = p_cam.y() / z;
  const double r = std::sqrt(a * a + b * b);
  const double theta = std::atan(r);
  const double t2 = theta * theta;
  const double theta_d =
      theta * (1.0 + t2 * (model.k1 + t2 * (model.k2 + t2 * (model.k3 + t2 * model.k4))));
  const double scale = r < 1e-12 ? 1.0 : theta_d / r;
  const double xp = scale * a;
  const double yp = scale * b;
  return {model.fx * (xp + model.alpha * yp) + model.cx, model.fy * yp + model.cy};
}

/// Rounding used everywhere a sub-pixel coordinate becomes a pixel cell:
/// half away from zero.
inline long round_pixel(double v) { return std::lround(v); }

inline bool in_image(const PixelCoord& px, const CameraModel& model) {
  const long u = round_pixel(px.u);
  const long v = round_pixel(px.v);
  return u >= 0 && u < model.width && v >= 0 && v < model.height;
}

}  // namespace semfuse
