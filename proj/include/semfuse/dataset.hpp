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

#include <filesystem>
#include <string>
#include <vector>

#include "semfuse/io.hpp"
#include "semfuse/scene_presets.hpp"
#include "semfuse/synthscene.hpp"

namespace semfuse {

struct DatasetPaths {
  std::filesystem::path scene;
  std::filesystem::path calibration;
  std::filesystem::path odometry;
  std::filesystem::path scans;
  std::filesystem::path images;
  std::filesystem::path truth;
  std::filesystem::path merge;
};

/// Writes a complete synthetic dataset for `sweeps` consecutive lidar sweeps:
/// scan file, odometry, calibration, per-sweep score maps with trivial grid
/// superpixels, ground truth, an identity merge spec, and the image index.
inline DatasetPaths emit_dataset(const SceneSpec& base, const std::filesystem::path& dir,
                                 int sweeps = 1, float peak_score = 8.0f,
                                 int superpixel_cell = 16) {
  std::filesystem::create_directories(dir);
  DatasetPaths paths;
  paths.scene = dir / "scene.json";
  paths.calibration = dir / "calibration.json";
  paths.odometry = dir / "odometry.csv";
  paths.scans = dir / "scans.jsonl";
  paths.images = dir / "images.json";
  paths.truth = dir / "truth.csv";
  paths.merge = dir / "merge.json";

  io::save_scene(base, paths.scene);
  io::save_calibration({base.T_veh_l, base.cameras}, paths.calibration);

  const double period = base.sweep_period();
  std::vector<std::pair<std::string, LidarScan>> scans;
  io::TruthMap truth;
  io::ImageIndex index;
  index.class_names = base.class_names;
  index.gaps = recommended_gaps(base.lidar);
  std::vector<StampedPose> odometry;

  for (int k = 0; k < sweeps; ++k) {
    SceneSpec sweep = base;
    sweep.t0 = base.t0 + k * period;
    sweep.t_ref = sweep.t0 + 0.5 * period;
    const std::string scan_id = std::to_string(k);

    SimulatedScan sim = simulate_scan(sweep);
    for (std::size_t i = 0; i < sim.truth.size(); ++i) {
      truth[scan_id][i] = sim.truth[i];
    }
    scans.emplace_back(scan_id, std::move(sim.scan));

    for (const CameraModel& cam : sweep.cameras) {
      const RenderedView view = render_semantic_image(sweep, cam, peak_score);
      const std::string stem = cam.id + "_" + scan_id;
      io::save_score_map(view.scores, dir / (stem + "_scores.sfsm"));
      io::save_superpixel_map(
          SuperpixelMap::grid(view.labels.height, view.labels.width, superpixel_cell),
          dir / (stem + "_superpixels.sfsp"));
      index.images.push_back({cam.id, sweep.t_ref, stem + "_scores.sfsm",
                              stem + "_superpixels.sfsp", "", ""});
    }

    const OdometryTrack sweep_track = sample_odometry(sweep);
    for (const StampedPose& s : sweep_track.samples()) {
      if (odometry.empty() || s.t > odometry.back().t + 1e-9) {
        odometry.push_back(s);
      }
    }
  }

  io::save_scans(scans, paths.scans);
  io::save_truth_csv(truth, paths.truth);
  io::save_image_index(index, paths.images);
  io::save_odometry_csv(OdometryTrack(std::move(odometry)), paths.odometry);
  io::save_merge_spec(identity_merge(base.class_names), paths.merge);
  return paths;
}

}  // namespace semfuse
