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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semfuse/errors.hpp"
#include "semfuse/fusion.hpp"
#include "semfuse/motion.hpp"

namespace semfuse {

struct ClassMetrics {
  std::string name;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::string method;  // direct | motion | motion_mask
  std::vector<ClassMetrics> per_class;
  std::uint64_t evaluated_predictions = 0;
  std::uint64_t truth_points = 0;
  std::string averaging = "micro";  // pooled counts across scans
};

/// Compares argmax labels of the merged cloud against ground truth. Truth
/// labels index the cloud's (pre-merge) class list; truth on discarded
/// classes is excluded, and points absent from the cloud count as false
/// negatives for their truth class.
inline EvalReport evaluate(const SemanticPointCloud& cloud,
                           const std::map<std::size_t, std::uint32_t>& truth,
                           const ClassMergeSpec& merge,
                           const std::string& method = "motion_mask") {
  const detail::MergePlan plan = detail::build_merge_plan(cloud.class_names, merge);
  const SemanticPointCloud merged = merge_classes(cloud, merge);

  std::map<std::size_t, int> predicted;
  for (const SemanticPoint& point : merged.points) {
    int argmax = 0;
    for (std::size_t c = 1; c < point.probs.size(); ++c) {
      if (point.probs[c] > point.probs[argmax]) argmax = static_cast<int>(c);
    }
    predicted[point.source_index] = argmax;
  }

  EvalReport report;
  report.method = method;
  report.per_class.resize(plan.targets.size());
  for (std::size_t k = 0; k < plan.targets.size(); ++k) {
    report.per_class[k].name = plan.targets[k];
  }

  for (const auto& [index, truth_class] : truth) {
    if (truth_class >= cloud.class_names.size()) {
      throw UnknownClassInTruth("truth class id " + std::to_string(truth_class) +
                                " outside the class list");
    }
    const int target = plan.source_to_target[truth_class];
    if (target < 0) continue;  // truth on a discarded class is not evaluated
    report.truth_points++;
    auto it = predicted.find(index);
    if (it == predicted.end()) {
      report.per_class[target].fn++;
      continue;
    }
    report.evaluated_predictions++;
    if (it->second == target) {
      report.per_class[target].tp++;
    } else {
      report.per_class[target].fn++;
      report.per_class[it->second].fp++;
    }
  }

  for (ClassMetrics& m : report.per_class) {
    m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  return report;
}

/// Pools counts across scans (micro-average) and recomputes the ratios.
inline EvalReport pool_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) {
    throw InvalidParameter("cannot pool zero reports");
  }
  EvalReport pooled = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    if (r.per_class.size() != pooled.per_class.size()) {
      throw DimensionMismatch("reports cover different class sets");
    }
    pooled.evaluated_predictions += r.evaluated_predictions;
    pooled.truth_points += r.truth_points;
    for (std::size_t k = 0; k < pooled.per_class.size(); ++k) {
      if (r.per_class[k].name != pooled.per_class[k].name) {
        throw DimensionMismatch("reports cover different class sets");
      }
      pooled.per_class[k].tp += r.per_class[k].tp;
      pooled.per_class[k].fp += r.per_class[k].fp;
      pooled.per_class[k].fn += r.per_class[k].fn;
    }
  }
  for (ClassMetrics& m : pooled.per_class) {
    m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
  }
  return pooled;
}

/// The three-way comparison: direct projection, projection after motion
/// correction, and the full pipeline with occlusion masking.
inline std::array<EvalReport, 3> ablation_run(
    const LidarScan& raw_scan, const OdometryTrack& track,
    const std::map<std::string, ProbabilityImage>& prob_images, const CalibrationRig& rig,
    const GapSpec& gaps, const std::map<std::size_t, std::uint32_t>& truth,
    const ClassMergeSpec& merge, double t_ref, InterpolationMode mode,
    const std::vector<std::string>& class_names) {
  MotionCorrectionConfig cfg;
  cfg.t_ref = t_ref;
  cfg.T_veh_l = rig.T_veh_l;
  cfg.mode = mode;
  const LidarScan corrected = correct_scan(raw_scan, track, cfg);

  FusionResult direct = fuse_scan(raw_scan, prob_images, rig.cameras, gaps,
                                  VisibilityPolicy::frustum_only, class_names, t_ref);
  FusionResult motion = fuse_scan(corrected, prob_images, rig.cameras, gaps,
                                  VisibilityPolicy::frustum_only, class_names, t_ref);
  FusionResult full = fuse_scan(corrected, prob_images, rig.cameras, gaps,
                                VisibilityPolicy::masked, class_names, t_ref);

  return {evaluate(direct.cloud, truth, merge, "direct"),
          evaluate(motion.cloud, truth, merge, "motion"),
          evaluate(full.cloud, truth, merge, "motion_mask")};
}

}  // namespace semfuse
