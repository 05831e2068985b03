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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "semfuse/camera.hpp"
#include "semfuse/errors.hpp"
#include "semfuse/geometry.hpp"

namespace semfuse {

/// Angular spacing between adjacent lidar returns, degrees.
struct GapSpec {
  double theta_v_deg = 2.0;  // vertical, between scan rings
  double theta_h_deg = 0.1;  // horizontal, between firings
};

struct PixelGaps {
  int u_gap = 1;
  int v_gap = 1;
};

/// Mask rectangle size in pixels: round(f * tan(theta)), forced odd so the
/// rectangle centers on a pixel, never below 1.
inline PixelGaps gap_pixels(const CameraModel& model, const GapSpec& gaps) {
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  auto one_gap = [](double f, double theta_deg) {
    long g = std::lround(f * std::tan(theta_deg * kDegToRad));
    if (g % 2 == 0) g += 1;
    return static_cast<int>(std::max(1L, g));
  };
  return {one_gap(model.fx, gaps.theta_h_deg), one_gap(model.fy, gaps.theta_v_deg)};
}

enum class Visibility : std::uint8_t { visible, occluded, out_of_view, behind_camera };

inline const char* to_string(Visibility v) {
  switch (v) {
    case Visibility::visible: return "visible";
    case Visibility::occluded: return "occluded";
    case Visibility::out_of_view: return "out_of_view";
    case Visibility::behind_camera: return "behind_camera";
  }
  return "?";
}

/// Per-point visibility states in input order; `pixel` holds the projected
/// coordinate for every point that was in front of the camera.
struct VisibilityResult {
  std::vector<Visibility> state;
  std::vector<PixelCoord> pixel;

  std::size_t count(Visibility v) const {
    return static_cast<std::size_t>(std::count(state.begin(), state.end(), v));
  }
};

/// Boolean occupancy grid matching the camera image.
class MaskGrid {
 public:
  MaskGrid(int width, int height)
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * height, 0) {}

  bool occupied(long u, long v) const {
    return cells_[static_cast<std::size_t>(v) * width_ + u] != 0;
  }

  /// Marks a u_gap x v_gap rectangle centered on (u, v), clipped to bounds.
  void stamp(long u, long v, const PixelGaps& gaps) {
    const long hu = (gaps.u_gap - 1) / 2;
    const long hv = (gaps.v_gap - 1) / 2;
    const long x0 = std::max(0L, u - hu);
    const long x1 = std::min<long>(width_ - 1, u + hu);
    const long y0 = std::max(0L, v - hv);
    const long y1 = std::min<long>(height_ - 1, v + hv);
    for (long y = y0; y <= y1; ++y) {
      std::fill(cells_.begin() + y * width_ + x0, cells_.begin() + y * width_ + x1 + 1,
                std::uint8_t{1});
    }
  }

  std::size_t occupied_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

/// Distance-ordered mask test: nearer points claim rectangles of the expected
/// return spacing; later (farther) points landing on a claimed cell are
/// occluded. A point's own cell is tested before its rectangle is stamped, so
/// coincident points resolve by input order.
inline VisibilityResult visibility_filter(std::span<const Point3> points_cam,
                                          const CameraModel& model, const GapSpec& gaps) {
  const PixelGaps pixel_gaps = gap_pixels(model, gaps);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  VisibilityResult result;
  result.state.assign(points_cam.size(), Visibility::behind_camera);
  result.pixel.assign(points_cam.size(), {nan, nan});

  std::vector<std::size_t> order;
  order.reserve(points_cam.size());
  for (std::size_t i = 0; i < points_cam.size(); ++i) {
    if (points_cam[i].z() > 0.0) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points_cam[a].squaredNorm() < points_cam[b].squaredNorm();
  });

  MaskGrid mask(model.width, model.height);
  for (std::size_t i : order) {
    const PixelCoord px = project(points_cam[i], model);
    result.pixel[i] = px;
    if (!in_image(px, model)) {
      result.state[i] = Visibility::out_of_view;
      continue;
    }
    const long u = round_pixel(px.u);
    const long v = round_pixel(px.v);
    if (mask.occupied(u, v)) {
      result.state[i] = Visibility::occluded;
      continue;
    }
    result.state[i] = Visibility::visible;
    mask.stamp(u, v, pixel_gaps);
  }
  return result;
}

/// Frustum-only visibility: behind-camera and out-of-image rejection with no
/// occlusion masking (the direct-projection baseline).
inline VisibilityResult frustum_filter(std::span<const Point3> points_cam,
                                       const CameraModel& model) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  VisibilityResult result;
  result.state.assign(points_cam.size(), Visibility::behind_camera);
  result.pixel.assign(points_cam.size(), {nan, nan});
  for (std::size_t i = 0; i < points_cam.size(); ++i) {
    if (points_cam[i].z() <= 0.0) continue;
    const PixelCoord px = project(points_cam[i], model);
    result.pixel[i] = px;
    result.state[i] = in_image(px, model) ? Visibility::visible : Visibility::out_of_view;
  }
  return result;
}

}  // namespace semfuse
