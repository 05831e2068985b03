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

#include <atomic>
#include <filesystem>
#include <optional>
#include <thread>
#include <vector>

#include "semfuse/evaluation.hpp"
#include "semfuse/fusion.hpp"
#include "semfuse/io.hpp"
#include "semfuse/motion.hpp"
#include "semfuse/slic.hpp"

namespace semfuse {

struct SlicParams {
  int target_count = 1200;
  double compactness = 10.0;
  int iterations = 10;
};

struct PipelineConfig {
  std::filesystem::path calibration_path;
  std::filesystem::path odometry_path;
  std::filesystem::path scans_path;
  std::filesystem::path images_path;
  std::filesystem::path merge_spec_path;  // empty: write the raw class set
  std::filesystem::path output_dir;
  GapSpec gaps{2.0, 0.1};
  bool gaps_explicit = false;  // true when flags override the dataset's gaps
  InterpolationMode mode = InterpolationMode::nearest;
  SlicParams slic;
  int jobs = 0;  // 0: machine parallelism
  std::uint64_t seed = 0;
  bool dump_stage = false;
};

struct ScanOutput {
  std::string scan_id;
  std::filesystem::path csv;
  std::filesystem::path sidecar;
  VisibilityCounts counts;
  std::size_t points_written = 0;
  double t_ref = 0.0;
};

struct RunSummary {
  std::vector<ScanOutput> scans;
};

namespace pipeline_detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const FormatError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

/// Image timestamp nearest to `target`; ties resolve to the earlier one.
inline double nearest_time(const std::vector<double>& times, double target) {
  double best = times.front();
  for (double t : times) {
    if (std::abs(t - target) < std::abs(best - target)) {
      best = t;
    }
  }
  return best;
}

inline const io::ImageEntry* entry_for_camera(const io::ImageIndex& index,
                                              const std::string& camera, double t_ref) {
  const io::ImageEntry* best = nullptr;
  for (const io::ImageEntry& e : index.images) {
    if (e.camera != camera) continue;
    if (best == nullptr || std::abs(e.t - t_ref) < std::abs(best->t - t_ref)) {
      best = &e;
    }
  }
  return best;
}

}  // namespace pipeline_detail

/// Probability image for one dataset entry: precomputed if present, otherwise
/// tempered softmax over the score map with superpixels from file or SLIC.
inline ProbabilityImage probability_image_for(const io::ImageEntry& entry,
                                              const std::filesystem::path& base,
                                              const SlicParams& slic) {
  if (!entry.probimage.empty()) {
    return io::load_probability_image(base / entry.probimage);
  }
  if (entry.scoremap.empty()) {
    throw ConfigError("image entry for camera '" + entry.camera +
                      "' carries neither probimage nor scoremap");
  }
  const ScoreMap scores = io::load_score_map(base / entry.scoremap);
  SuperpixelMap superpixels;
  if (!entry.superpixels.empty()) {
    superpixels = io::load_superpixel_map(base / entry.superpixels);
    if (superpixels.width != scores.width || superpixels.height != scores.height) {
      throw DimensionMismatch("superpixel map does not match score map for camera '" +
                              entry.camera + "'");
    }
  } else if (!entry.image.empty()) {
    const RgbImage image = io::load_ppm(base / entry.image);
    if (image.width != scores.width || image.height != scores.height) {
      throw DimensionMismatch("image does not match score map for camera '" + entry.camera +
                              "'");
    }
    superpixels = slic_segment(image, slic.target_count, slic.compactness, slic.iterations);
  } else {
    throw ConfigError("image entry for camera '" + entry.camera +
                      "' needs superpixels or an RGB image to segment");
  }
  const LabelImage labels = argmax_labels(scores);
  const PredominantFractions fractions = predominant_fraction(labels, superpixels);
  return temperature_softmax(scores, superpixels, fractions);
}

/// Probability images for every camera of the rig at the scan's reference
/// time. Throws MissingCamera when the index has no entry for a camera.
inline std::map<std::string, ProbabilityImage> probability_images_at(
    const io::ImageIndex& index, const CalibrationRig& rig, double t_ref,
    const SlicParams& slic) {
  std::map<std::string, ProbabilityImage> images;
  for (const CameraModel& cam : rig.cameras) {
    const io::ImageEntry* entry = pipeline_detail::entry_for_camera(index, cam.id, t_ref);
    if (entry == nullptr) {
      throw MissingCamera("image index has no entry for camera '" + cam.id + "'");
    }
    images.emplace(cam.id, probability_image_for(*entry, index.base, slic));
  }
  return images;
}

/// Full pipeline for one loaded scan; shared by run_pipeline and the CLI.
inline ScanOutput process_scan(const std::string& scan_id, const LidarScan& scan,
                               const CalibrationRig& rig, const OdometryTrack& track,
                               const io::ImageIndex& index,
                               const std::optional<ClassMergeSpec>& merge,
                               const PipelineConfig& cfg) {
  namespace pd = pipeline_detail;
  if (scan.packets.empty()) {
    throw StageError("motion", "scan " + scan_id + " has no packets");
  }
  std::vector<double> image_times;
  for (const io::ImageEntry& e : index.images) image_times.push_back(e.t);
  if (image_times.empty()) {
    throw ConfigError("image index lists no images");
  }
  std::sort(image_times.begin(), image_times.end());
  const double t_ref = pd::nearest_time(image_times, scan_midpoint(scan));

  const auto prob_images = pd::stage("semantics", [&] {
    return probability_images_at(index, rig, t_ref, cfg.slic);
  });

  MotionCorrectionConfig motion_cfg;
  motion_cfg.t_ref = t_ref;
  motion_cfg.T_veh_l = rig.T_veh_l;
  motion_cfg.mode = cfg.mode;
  const LidarScan corrected =
      pd::stage("motion", [&] { return correct_scan(scan, track, motion_cfg); });

  FusionResult fused = pd::stage("fusion", [&] {
    return fuse_scan(corrected, prob_images, rig.cameras, cfg.gaps, VisibilityPolicy::masked,
                     index.class_names, t_ref);
  });
  if (merge) {
    fused.cloud = pd::stage("fusion", [&] { return merge_classes(fused.cloud, *merge); });
  }

  ScanOutput out;
  out.scan_id = scan_id;
  out.counts = fused.counts;
  out.points_written = fused.cloud.points.size();
  out.t_ref = t_ref;
  out.csv = cfg.output_dir / ("scan_" + scan_id + ".csv");
  out.sidecar = cfg.output_dir / ("scan_" + scan_id + ".json");
  pd::stage("output", [&] {
    io::save_semantic_cloud(fused.cloud, fused.counts, out.csv, out.sidecar);
    if (cfg.dump_stage) {
      io::save_scans({{scan_id, corrected}},
                     cfg.output_dir / ("scan_" + scan_id + "_corrected.jsonl"));
      std::vector<Point3> points;
      for (const LidarPacket& p : corrected.packets) {
        points.insert(points.end(), p.points.begin(), p.points.end());
      }
      for (const CameraModel& cam : rig.cameras) {
        std::vector<Point3> cam_points(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
          cam_points[i] = to_camera_frame(points[i], cam);
        }
        const VisibilityResult vis = visibility_filter(cam_points, cam, cfg.gaps);
        std::string dump = "point_index,state,u,v\n";
        for (std::size_t i = 0; i < vis.state.size(); ++i) {
          dump += std::to_string(i);
          dump += ",";
          dump += to_string(vis.state[i]);
          dump += ",";
          dump += std::isnan(vis.pixel[i].u) ? "nan" : io::format_real(vis.pixel[i].u);
          dump += ",";
          dump += std::isnan(vis.pixel[i].v) ? "nan" : io::format_real(vis.pixel[i].v);
          dump += "\n";
        }
        io::write_file(cfg.output_dir / ("scan_" + scan_id + "_visibility_" + cam.id + ".csv"),
                       dump);
      }
    }
    return 0;
  });
  return out;
}

/// Loads every input, processes all scans (concurrently up to cfg.jobs), and
/// writes one semantic-cloud CSV plus sidecar per scan.
inline RunSummary run_pipeline(const PipelineConfig& cfg) {
  const CalibrationRig rig = io::load_calibration(cfg.calibration_path);
  const OdometryTrack track = io::load_odometry_csv(cfg.odometry_path);
  io::ImageIndex index = io::load_image_index(cfg.images_path);
  const auto scans = io::load_scans(cfg.scans_path);
  if (scans.empty()) {
    throw FormatError(cfg.scans_path.string() + ": no scans");
  }
  std::optional<ClassMergeSpec> merge;
  if (!cfg.merge_spec_path.empty()) {
    merge = io::load_merge_spec(cfg.merge_spec_path);
  }
  PipelineConfig effective = cfg;
  if (!cfg.gaps_explicit && index.gaps) {
    effective.gaps = *index.gaps;
  }
  std::filesystem::create_directories(cfg.output_dir);

  RunSummary summary;
  summary.scans.resize(scans.size());
  std::vector<std::exception_ptr> failures(scans.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(scans.size(), cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs) : hw);

  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < scans.size(); i = next.fetch_add(1)) {
      try {
        summary.scans[i] =
            process_scan(scans[i].first, scans[i].second, rig, track, index, merge, effective);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);  // earliest scan wins, deterministically
  }
  return summary;
}

}  // namespace semfuse
