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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "semfuse/errors.hpp"

namespace semfuse {

using Point3 = Eigen::Vector3d;

/// Rigid-body transform: rotation (orthonormal, det +1) followed by translation.
/// Rotations are stored as matrices; quaternion inputs are converted once on load.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(double x, double y, double z) {
    return {Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, y, z)};
  }

  static RigidTransform from_quaternion(const Eigen::Quaterniond& q,
                                        const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    return {q.normalized().toRotationMatrix(), t};
  }

  /// Rotation about the world z axis (vehicle yaw), angle in radians.
  static RigidTransform from_yaw(double yaw, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    return {Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t};
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// Max absolute deviation of R^T R from the identity.
inline double orthonormality_drift(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

inline bool is_valid(const RigidTransform& t, double tol = 1e-9) {
  return t.rotation.allFinite() && t.translation.allFinite() &&
         orthonormality_drift(t.rotation) <= tol &&
         std::abs(t.rotation.determinant() - 1.0) <= tol;
}

/// Snaps a slightly drifted rotation back onto SO(3) via its quaternion.
inline Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}

/// Composition: the result applies `b` first, then `a`.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  if (orthonormality_drift(out.rotation) > 1e-12) {
    out.rotation = orthonormalized(out.rotation);
  }
  return out;
}

inline RigidTransform invert(const RigidTransform& t) {
  Eigen::Matrix3d rt = t.rotation.transpose();
  return {rt, -(rt * t.translation)};
}

inline Point3 apply(const RigidTransform& t, const Point3& p) {
  return t.rotation * p + t.translation;
}

/// Vehicle footprint pose in the world frame at time `t` (seconds, per-run epoch).
struct StampedPose {
  double t = 0.0;
  RigidTransform pose;
};

enum class InterpolationMode { nearest, interpolated };

/// Immutable, time-ordered sequence of odometry poses.
class OdometryTrack {
 public:
  explicit OdometryTrack(std::vector<StampedPose> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) {
      throw EmptyTrack("odometry track has no samples");
    }
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (!(samples_[i - 1].t < samples_[i].t)) {
        throw Error("odometry timestamps must be strictly increasing");
      }
    }
  }

  const std::vector<StampedPose>& samples() const { return samples_; }
  double first_time() const { return samples_.front().t; }
  double last_time() const { return samples_.back().t; }

  bool covers(double t) const { return t >= first_time() && t <= last_time(); }

  /// Pose at time `t`. `nearest` snaps to the sample with minimal |t - sample.t|
  /// (ties resolve to the earlier sample); `interpolated` lerps translation and
  /// takes the shortest-geodesic rotation between the bracketing samples.
  RigidTransform pose_at(double t, InterpolationMode mode) const {
    if (!covers(t)) {
      throw TimestampOutOfRange("time " + std::to_string(t) + " outside odometry coverage [" +
                                std::to_string(first_time()) + ", " + std::to_string(last_time()) +
                                "]");
    }
    auto upper = std::lower_bound(
        samples_.begin(), samples_.end(), t,
        [](const StampedPose& s, double value) { return s.t < value; });
    if (upper != samples_.end() && upper->t == t) {
      return upper->pose;
    }
    // `t` lies strictly between (upper-1) and upper; coverage guarantees both exist.
    auto lower = std::prev(upper);
    if (mode == InterpolationMode::nearest) {
      double d_lower = t - lower->t;
      double d_upper = upper->t - t;
      return d_lower <= d_upper ? lower->pose : upper->pose;
    }
    double alpha = (t - lower->t) / (upper->t - lower->t);
    Eigen::Quaterniond qa(lower->pose.rotation);
    Eigen::Quaterniond qb(upper->pose.rotation);
    RigidTransform out;
    out.rotation = qa.slerp(alpha, qb).toRotationMatrix();
    out.translation = (1.0 - alpha) * lower->pose.translation + alpha * upper->pose.translation;
    return out;
  }

 private:
  std::vector<StampedPose> samples_;
};

/// Relative vehicle motion between `t_to` and `t_from`, expressed in the
/// vehicle frame at `t_from`: invert(pose(t_from)) o pose(t_to).
inline RigidTransform ego_motion_between(const OdometryTrack& track, double t_from, double t_to,
                                         InterpolationMode mode) {
  return compose(invert(track.pose_at(t_from, mode)), track.pose_at(t_to, mode));
}

}  // namespace semfuse
