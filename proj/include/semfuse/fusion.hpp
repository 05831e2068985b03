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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "semfuse/camera.hpp"
#include "semfuse/errors.hpp"
#include "semfuse/motion.hpp"
#include "semfuse/occlusion.hpp"
#include "semfuse/semantics.hpp"

namespace semfuse {

/// A motion-corrected 3-D point carrying a class probability vector and its
/// visibility provenance.
struct SemanticPoint {
  Point3 position = Point3::Zero();  // lidar frame at t_ref
  std::vector<double> probs;
  std::string source_camera;
  PixelCoord pixel;
  std::size_t source_index = 0;  // flattened index into the input scan
};

struct SemanticPointCloud {
  std::vector<SemanticPoint> points;
  std::vector<std::string> class_names;
  double t_ref = 0.0;
};

struct VisibilityCounts {
  std::size_t visible = 0;
  std::size_t occluded = 0;
  std::size_t out_of_view = 0;
  std::size_t behind_camera = 0;
};

enum class VisibilityPolicy { masked, frustum_only };

struct FusionResult {
  SemanticPointCloud cloud;
  VisibilityCounts counts;
};

/// Transfers per-pixel probability vectors onto the visible points of a
/// motion-corrected scan across all cameras. Points seen by several cameras
/// take the one whose pixel lies farthest from the image border (ties to the
/// lower camera id); points seen by none are dropped but counted.
inline FusionResult fuse_scan(const LidarScan& corrected,
                              const std::map<std::string, ProbabilityImage>& prob_images,
                              const std::vector<CameraModel>& models, const GapSpec& gaps,
                              VisibilityPolicy policy = VisibilityPolicy::masked,
                              const std::vector<std::string>& class_names = {},
                              double t_ref = 0.0) {
  std::vector<Point3> points;
  points.reserve(corrected.point_count());
  for (const LidarPacket& packet : corrected.packets) {
    points.insert(points.end(), packet.points.begin(), packet.points.end());
  }

  struct Candidate {
    double margin = -1.0;
    const CameraModel* camera = nullptr;
    const ProbabilityImage* probs = nullptr;
    PixelCoord pixel;
  };
  std::vector<Candidate> best(points.size());
  // Per-point strongest state across cameras, for the summary counters.
  auto rank = [](Visibility v) {
    switch (v) {
      case Visibility::visible: return 3;
      case Visibility::occluded: return 2;
      case Visibility::out_of_view: return 1;
      case Visibility::behind_camera: return 0;
    }
    return 0;
  };
  std::vector<int> best_rank(points.size(), 0);

  for (const CameraModel& model : models) {
    auto it = prob_images.find(model.id);
    if (it == prob_images.end()) {
      throw MissingCamera("no probability image for camera '" + model.id + "'");
    }
    const ProbabilityImage& probs = it->second;
    if (probs.width != model.width || probs.height != model.height) {
      throw DimensionMismatch("probability image does not match camera '" + model.id + "'");
    }
    if (!class_names.empty() && probs.classes != static_cast<int>(class_names.size())) {
      throw DimensionMismatch("class count differs from class_names for camera '" + model.id +
                              "'");
    }
    std::vector<Point3> cam_points(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cam_points[i] = to_camera_frame(points[i], model);
    }
    VisibilityResult vis = policy == VisibilityPolicy::masked
                               ? visibility_filter(cam_points, model, gaps)
                               : frustum_filter(cam_points, model);
    for (std::size_t i = 0; i < points.size(); ++i) {
      best_rank[i] = std::max(best_rank[i], rank(vis.state[i]));
      if (vis.state[i] != Visibility::visible) continue;
      const PixelCoord px = vis.pixel[i];
      const double margin = std::min(std::min(px.u, model.width - 1.0 - px.u),
                                     std::min(px.v, model.height - 1.0 - px.v));
      Candidate& cand = best[i];
      const bool wins = cand.camera == nullptr || margin > cand.margin ||
                        (margin == cand.margin && model.id < cand.camera->id);
      if (wins) {
        cand = {margin, &model, &probs, px};
      }
    }
  }

  FusionResult result;
  result.cloud.class_names = class_names;
  result.cloud.t_ref = t_ref;
  for (std::size_t i = 0; i < points.size(); ++i) {
    switch (best_rank[i]) {
      case 3: result.counts.visible++; break;
      case 2: result.counts.occluded++; break;
      case 1: result.counts.out_of_view++; break;
      default: result.counts.behind_camera++; break;
    }
    const Candidate& cand = best[i];
    if (cand.camera == nullptr) continue;
    SemanticPoint sp;
    sp.position = points[i];
    sp.source_camera = cand.camera->id;
    sp.pixel = cand.pixel;
    sp.source_index = i;
    const int x = static_cast<int>(round_pixel(cand.pixel.u));
    const int y = static_cast<int>(round_pixel(cand.pixel.v));
    sp.probs.resize(cand.probs->classes);
    for (int c = 0; c < cand.probs->classes; ++c) {
      sp.probs[c] = cand.probs->at(c, y, x);
    }
    result.cloud.points.push_back(std::move(sp));
  }
  return result;
}

/// Maps every source class to a target class or discards it.
struct ClassMergeSpec {
  static constexpr const char* kDiscard = "discard";
  std::map<std::string, std::string> mapping;
};

inline ClassMergeSpec identity_merge(const std::vector<std::string>& classes) {
  ClassMergeSpec spec;
  for (const std::string& name : classes) {
    spec.mapping[name] = name;
  }
  return spec;
}

/// The stock urban 12-to-7 protocol: drop sky and unlabeled, fold sign into
/// pole, rider into pedestrian, and fence into building.
inline ClassMergeSpec default_urban_merge() {
  ClassMergeSpec spec;
  spec.mapping = {
      {"unlabeled", ClassMergeSpec::kDiscard},
      {"sky", ClassMergeSpec::kDiscard},
      {"building", "building"},
      {"pole", "pole"},
      {"road", "road"},
      {"undrivable_road", "undrivable_road"},
      {"vegetation", "vegetation"},
      {"sign", "pole"},
      {"fence", "building"},
      {"vehicle", "vehicle"},
      {"pedestrian", "pedestrian"},
      {"rider", "pedestrian"},
  };
  return spec;
}

/// The canonical 12-class palette the default merge applies to.
inline std::vector<std::string> urban_class_names() {
  return {"unlabeled", "sky",        "building",  "pole",       "road",  "undrivable_road",
          "vegetation", "sign",      "fence",     "vehicle",    "pedestrian", "rider"};
}

namespace detail {

struct MergePlan {
  std::vector<std::string> targets;   // first-appearance order over retained sources
  std::vector<int> source_to_target;  // -1 = discard
};

inline MergePlan build_merge_plan(const std::vector<std::string>& class_names,
                                  const ClassMergeSpec& spec) {
  MergePlan plan;
  plan.source_to_target.resize(class_names.size(), -1);
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    auto it = spec.mapping.find(class_names[c]);
    if (it == spec.mapping.end()) {
      throw IncompleteSpec("merge spec does not map class '" + class_names[c] + "'");
    }
    if (it->second == ClassMergeSpec::kDiscard) continue;
    auto pos = std::find(plan.targets.begin(), plan.targets.end(), it->second);
    if (pos == plan.targets.end()) {
      plan.targets.push_back(it->second);
      plan.source_to_target[c] = static_cast<int>(plan.targets.size()) - 1;
    } else {
      plan.source_to_target[c] = static_cast<int>(pos - plan.targets.begin());
    }
  }
  return plan;
}

}  // namespace detail

/// Sums merged source probabilities, removes discarded mass, renormalizes, and
/// drops points whose retained mass falls below 1e-6.
inline SemanticPointCloud merge_classes(const SemanticPointCloud& cloud,
                                        const ClassMergeSpec& spec) {
  const detail::MergePlan plan = detail::build_merge_plan(cloud.class_names, spec);
  SemanticPointCloud out;
  out.class_names = plan.targets;
  out.t_ref = cloud.t_ref;
  for (const SemanticPoint& point : cloud.points) {
    std::vector<double> merged(plan.targets.size(), 0.0);
    double mass = 0.0;
    for (std::size_t c = 0; c < point.probs.size(); ++c) {
      const int target = plan.source_to_target[c];
      if (target < 0) continue;
      merged[target] += point.probs[c];
      mass += point.probs[c];
    }
    if (mass < 1e-6) continue;
    for (double& p : merged) p /= mass;
    SemanticPoint sp = point;
    sp.probs = std::move(merged);
    out.points.push_back(std::move(sp));
  }
  return out;
}

}  // namespace semfuse
