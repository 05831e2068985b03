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

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>

#include "semfuse/dataset.hpp"
#include "semfuse/evaluation.hpp"
#include "semfuse/io.hpp"
#include "semfuse/pipeline.hpp"
#include "semfuse/scene_presets.hpp"

namespace {

using namespace semfuse;

const std::map<std::string, InterpolationMode> kModeNames = {
    {"nearest", InterpolationMode::nearest},
    {"interpolated", InterpolationMode::interpolated}};

struct GapFlags {
  double theta_v = 2.0;
  double theta_h = 0.1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--theta-v", theta_v,
                    "vertical angular resolution between scan rings, degrees")
        ->capture_default_str();
    cmd->add_option("--theta-h", theta_h,
                    "horizontal angular resolution between firings, degrees")
        ->capture_default_str();
  }
  bool explicit_on(const CLI::App* cmd) const {
    return cmd->count("--theta-v") > 0 || cmd->count("--theta-h") > 0;
  }
  GapSpec spec() const { return {theta_v, theta_h}; }
};

struct SlicFlags {
  SlicParams params;

  void attach(CLI::App* cmd) {
    cmd->add_option("--slic-k", params.target_count, "target superpixel count")
        ->capture_default_str();
    cmd->add_option("--slic-compactness", params.compactness, "SLIC compactness weight")
        ->capture_default_str();
    cmd->add_option("--slic-iters", params.iterations, "SLIC iterations")
        ->capture_default_str();
  }
};

ClassMergeSpec merge_or_identity(const std::string& merge_path,
                                 const std::vector<std::string>& class_names) {
  if (!merge_path.empty()) {
    return io::load_merge_spec(merge_path);
  }
  return identity_merge(class_names);
}

GapSpec effective_gaps(const GapFlags& flags, const CLI::App* cmd,
                       const io::ImageIndex& index) {
  if (!flags.explicit_on(cmd) && index.gaps) {
    return *index.gaps;
  }
  return flags.spec();
}

int add_run_command(CLI::App& app) {
  auto cmd = app.add_subcommand("run", "full pipeline: semantics, motion, fusion per scan");
  auto cfg = std::make_shared<PipelineConfig>();
  auto gaps = std::make_shared<GapFlags>();
  auto slic = std::make_shared<SlicFlags>();
  auto mode = std::make_shared<std::string>("nearest");
  cmd->add_option("--calib", cfg->calibration_path, "calibration JSON")->required();
  cmd->add_option("--odometry", cfg->odometry_path, "odometry CSV")->required();
  cmd->add_option("--scans", cfg->scans_path, "scan file (JSON lines)")->required();
  cmd->add_option("--images", cfg->images_path, "image index JSON")->required();
  cmd->add_option("--out", cfg->output_dir, "output directory")->required();
  cmd->add_option("--merge", cfg->merge_spec_path, "class merge spec JSON (optional)");
  cmd->add_option("--mode", *mode, "odometry lookup mode")
      ->check(CLI::IsMember({"nearest", "interpolated"}))
      ->capture_default_str();
  cmd->add_option("--jobs", cfg->jobs, "parallel scans (0 = machine parallelism)")
      ->capture_default_str();
  cmd->add_option("--seed", cfg->seed, "seed for any randomized stage")->capture_default_str();
  cmd->add_flag("--dump-stage", cfg->dump_stage,
                "also write corrected scans and per-camera visibility flags");
  gaps->attach(cmd);
  slic->attach(cmd);
  cmd->callback([cmd, cfg, gaps, slic, mode]() {
    cfg->gaps = gaps->spec();
    cfg->gaps_explicit = gaps->explicit_on(cmd);
    cfg->slic = slic->params;
    cfg->mode = kModeNames.at(*mode);
    RunSummary summary = run_pipeline(*cfg);
    for (const ScanOutput& s : summary.scans) {
      std::cout << "scan " << s.scan_id << ": " << s.points_written << " labelled points -> "
                << s.csv.string() << " (visible " << s.counts.visible << ", occluded "
                << s.counts.occluded << ", out_of_view " << s.counts.out_of_view
                << ", behind_camera " << s.counts.behind_camera << ")\n";
    }
  });
  return 0;
}

int add_probabilize_command(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "probabilize", "score map -> probability image via superpixel-tempered softmax");
  auto scores_path = std::make_shared<std::string>();
  auto superpixels_path = std::make_shared<std::string>();
  auto image_path = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto slic = std::make_shared<SlicFlags>();
  cmd->add_option("--scores", *scores_path, "score map (.sfsm)")->required();
  cmd->add_option("--superpixels", *superpixels_path, "precomputed superpixel map (.sfsp)");
  cmd->add_option("--image", *image_path, "RGB image (PPM) to segment with SLIC");
  cmd->add_option("--out", *out_path, "output probability image (.sfpb)")->required();
  slic->attach(cmd);
  cmd->callback([scores_path, superpixels_path, image_path, out_path, slic]() {
    io::ImageEntry entry;
    entry.camera = "cli";
    entry.scoremap = *scores_path;
    entry.superpixels = *superpixels_path;
    entry.image = *image_path;
    ProbabilityImage probs = probability_image_for(entry, ".", slic->params);
    io::save_probability_image(probs, *out_path);
    std::cout << "wrote " << *out_path << " (" << probs.classes << " classes, " << probs.width
              << "x" << probs.height << ")\n";
  });
  return 0;
}

int add_fuse_command(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "fuse", "label transfer onto scans (assumes corrected scans unless --odometry)");
  auto calib = std::make_shared<std::string>();
  auto scans_path = std::make_shared<std::string>();
  auto images_path = std::make_shared<std::string>();
  auto odometry_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto merge_path = std::make_shared<std::string>();
  auto scan_id = std::make_shared<std::string>();
  auto mode = std::make_shared<std::string>("nearest");
  auto gaps = std::make_shared<GapFlags>();
  auto slic = std::make_shared<SlicFlags>();
  cmd->add_option("--calib", *calib, "calibration JSON")->required();
  cmd->add_option("--scans", *scans_path, "scan file")->required();
  cmd->add_option("--images", *images_path, "image index JSON")->required();
  cmd->add_option("--out", *out_dir, "output directory")->required();
  cmd->add_option("--odometry", *odometry_path,
                  "odometry CSV; when given, scans are motion-corrected first");
  cmd->add_option("--merge", *merge_path, "class merge spec JSON");
  cmd->add_option("--scan-id", *scan_id, "only this scan (default: all)");
  cmd->add_option("--mode", *mode, "odometry lookup mode")
      ->check(CLI::IsMember({"nearest", "interpolated"}))
      ->capture_default_str();
  gaps->attach(cmd);
  slic->attach(cmd);
  cmd->callback([=]() {
    const CalibrationRig rig = io::load_calibration(*calib);
    io::ImageIndex index = io::load_image_index(*images_path);
    const auto scans = io::load_scans(*scans_path);
    const GapSpec gap_spec = effective_gaps(*gaps, cmd, index);
    std::optional<ClassMergeSpec> merge;
    if (!merge_path->empty()) merge = io::load_merge_spec(*merge_path);
    std::optional<OdometryTrack> track;
    if (!odometry_path->empty()) track = io::load_odometry_csv(*odometry_path);
    std::filesystem::create_directories(*out_dir);

    std::vector<double> image_times;
    for (const io::ImageEntry& e : index.images) image_times.push_back(e.t);
    if (image_times.empty()) throw ConfigError("image index lists no images");
    std::sort(image_times.begin(), image_times.end());

    bool matched = false;
    for (const auto& [id, scan] : scans) {
      if (!scan_id->empty() && id != *scan_id) continue;
      matched = true;
      const double t_ref = pipeline_detail::nearest_time(image_times, scan_midpoint(scan));
      const auto prob_images = probability_images_at(index, rig, t_ref, slic->params);
      LidarScan ready = scan;
      if (track) {
        MotionCorrectionConfig mc;
        mc.t_ref = t_ref;
        mc.T_veh_l = rig.T_veh_l;
        mc.mode = kModeNames.at(*mode);
        ready = correct_scan(scan, *track, mc);
      }
      FusionResult fused = fuse_scan(ready, prob_images, rig.cameras, gap_spec,
                                     VisibilityPolicy::masked, index.class_names, t_ref);
      if (merge) fused.cloud = merge_classes(fused.cloud, *merge);
      const auto csv = std::filesystem::path(*out_dir) / ("scan_" + id + ".csv");
      const auto sidecar = std::filesystem::path(*out_dir) / ("scan_" + id + ".json");
      io::save_semantic_cloud(fused.cloud, fused.counts, csv, sidecar);
      std::cout << "scan " << id << ": " << fused.cloud.points.size()
                << " labelled points -> " << csv.string() << "\n";
    }
    if (!matched) throw ConfigError("scan id '" + *scan_id + "' not present in the scan file");
  });
  return 0;
}

int add_evaluate_command(CLI::App& app) {
  auto cmd = app.add_subcommand("evaluate", "compare a semantic cloud against ground truth");
  auto cloud_path = std::make_shared<std::string>();
  auto sidecar_path = std::make_shared<std::string>();
  auto truth_path = std::make_shared<std::string>();
  auto merge_path = std::make_shared<std::string>();
  auto report_path = std::make_shared<std::string>("report.json");
  auto scan_id = std::make_shared<std::string>("0");
  auto method = std::make_shared<std::string>("motion_mask");
  cmd->add_option("--cloud", *cloud_path, "semantic cloud CSV")->required();
  cmd->add_option("--sidecar", *sidecar_path,
                  "cloud sidecar JSON (default: cloud path with .json)");
  cmd->add_option("--truth", *truth_path, "ground truth CSV")->required();
  cmd->add_option("--merge", *merge_path, "class merge spec JSON (default: identity)");
  cmd->add_option("--report", *report_path, "output report JSON")->capture_default_str();
  cmd->add_option("--scan-id", *scan_id, "scan id within the truth file")
      ->capture_default_str();
  cmd->add_option("--method", *method, "method tag recorded in the report")
      ->check(CLI::IsMember({"direct", "motion", "motion_mask"}))
      ->capture_default_str();
  cmd->callback([=]() {
    std::filesystem::path sidecar = sidecar_path->empty()
                                        ? std::filesystem::path(*cloud_path)
                                              .replace_extension(".json")
                                        : std::filesystem::path(*sidecar_path);
    const io::LoadedCloud loaded = io::load_semantic_cloud(*cloud_path, sidecar);
    const io::TruthMap truth = io::load_truth_csv(*truth_path);
    auto it = truth.find(*scan_id);
    if (it == truth.end()) {
      throw ConfigError("truth file has no rows for scan id '" + *scan_id + "'");
    }
    const ClassMergeSpec merge = merge_or_identity(*merge_path, loaded.cloud.class_names);
    const EvalReport report = evaluate(loaded.cloud, it->second, merge, *method);
    io::write_file(*report_path, io::report_to_json(report).dump(2) + "\n");
    std::cout << io::format_report_table(report);
    std::cout << "report -> " << *report_path << "\n";
  });
  return 0;
}

int add_synth_command(CLI::App& app) {
  auto cmd = app.add_subcommand("synth", "generate a synthetic dataset with ground truth");
  auto scene_path = std::make_shared<std::string>();
  auto preset = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto sweeps = std::make_shared<int>(1);
  auto peak = std::make_shared<double>(8.0);
  auto cell = std::make_shared<int>(16);
  cmd->add_option("--scene", *scene_path, "scene spec JSON");
  cmd->add_option("--preset", *preset, "built-in scene")
      ->check(CLI::IsMember({"standard", "motion", "turn", "walls", "occlusion"}));
  cmd->add_option("--out", *out_dir, "output directory")->required();
  cmd->add_option("--seed", *seed, "scene seed (presets: occlusion)")->capture_default_str();
  cmd->add_option("--sweeps", *sweeps, "consecutive sweeps to simulate")
      ->capture_default_str();
  cmd->add_option("--peak-score", *peak, "score of the true class in emitted score maps")
      ->capture_default_str();
  cmd->add_option("--superpixel-cell", *cell, "grid cell size of emitted superpixel maps")
      ->capture_default_str();
  cmd->callback([=]() {
    SceneSpec spec;
    if (!scene_path->empty()) {
      spec = io::load_scene(*scene_path);
      if (cmd->count("--seed") > 0) spec.seed = *seed;
    } else if (!preset->empty()) {
      if (*preset == "standard") {
        spec = make_standard_scene();
      } else if (*preset == "motion") {
        spec = make_motion_scene(false);
      } else if (*preset == "turn") {
        spec = make_motion_scene(true);
      } else if (*preset == "walls") {
        spec = make_two_wall_scene();
      } else {
        spec = make_occlusion_scene(*seed);
      }
    } else {
      throw ConfigError("synth needs --scene or --preset");
    }
    DatasetPaths paths = emit_dataset(spec, *out_dir, *sweeps, static_cast<float>(*peak),
                                      *cell);
    std::cout << "dataset -> " << *out_dir << " (" << *sweeps << " sweep(s), "
              << spec.cameras.size() << " camera(s))\n"
              << "  scans: " << paths.scans.string() << "\n"
              << "  truth: " << paths.truth.string() << "\n"
              << "  images: " << paths.images.string() << "\n";
  });
  return 0;
}

int add_ablate_command(CLI::App& app) {
  auto cmd = app.add_subcommand(
      "ablate", "three-way comparison: direct, +motion correction, +occlusion masking");
  auto calib = std::make_shared<std::string>();
  auto odometry_path = std::make_shared<std::string>();
  auto scans_path = std::make_shared<std::string>();
  auto images_path = std::make_shared<std::string>();
  auto truth_path = std::make_shared<std::string>();
  auto merge_path = std::make_shared<std::string>();
  auto report_path = std::make_shared<std::string>("ablation.json");
  auto scan_id = std::make_shared<std::string>();
  auto mode = std::make_shared<std::string>("interpolated");
  auto gaps = std::make_shared<GapFlags>();
  auto slic = std::make_shared<SlicFlags>();
  cmd->add_option("--calib", *calib, "calibration JSON")->required();
  cmd->add_option("--odometry", *odometry_path, "odometry CSV")->required();
  cmd->add_option("--scans", *scans_path, "scan file")->required();
  cmd->add_option("--images", *images_path, "image index JSON")->required();
  cmd->add_option("--truth", *truth_path, "ground truth CSV")->required();
  cmd->add_option("--merge", *merge_path, "class merge spec JSON (default: identity)");
  cmd->add_option("--report", *report_path, "output report JSON")->capture_default_str();
  cmd->add_option("--scan-id", *scan_id, "only this scan (default: pool all scans)");
  cmd->add_option("--mode", *mode, "odometry lookup mode")
      ->check(CLI::IsMember({"nearest", "interpolated"}))
      ->capture_default_str();
  gaps->attach(cmd);
  slic->attach(cmd);
  cmd->callback([=]() {
    const CalibrationRig rig = io::load_calibration(*calib);
    const OdometryTrack track = io::load_odometry_csv(*odometry_path);
    io::ImageIndex index = io::load_image_index(*images_path);
    const auto scans = io::load_scans(*scans_path);
    const io::TruthMap truth = io::load_truth_csv(*truth_path);
    const GapSpec gap_spec = effective_gaps(*gaps, cmd, index);
    const ClassMergeSpec merge = merge_or_identity(*merge_path, index.class_names);

    std::vector<double> image_times;
    for (const io::ImageEntry& e : index.images) image_times.push_back(e.t);
    if (image_times.empty()) throw ConfigError("image index lists no images");
    std::sort(image_times.begin(), image_times.end());

    std::vector<EvalReport> direct, motion, full;
    for (const auto& [id, scan] : scans) {
      if (!scan_id->empty() && id != *scan_id) continue;
      auto truth_it = truth.find(id);
      if (truth_it == truth.end()) {
        throw ConfigError("truth file has no rows for scan id '" + id + "'");
      }
      const double t_ref = pipeline_detail::nearest_time(image_times, scan_midpoint(scan));
      const auto prob_images = probability_images_at(index, rig, t_ref, slic->params);
      auto reports = ablation_run(scan, track, prob_images, rig, gap_spec, truth_it->second,
                                  merge, t_ref, kModeNames.at(*mode), index.class_names);
      direct.push_back(reports[0]);
      motion.push_back(reports[1]);
      full.push_back(reports[2]);
    }
    if (direct.empty()) {
      throw ConfigError("no scans matched" +
                        (scan_id->empty() ? std::string() : " scan id '" + *scan_id + "'"));
    }
    const EvalReport pooled_direct = pool_reports(direct);
    const EvalReport pooled_motion = pool_reports(motion);
    const EvalReport pooled_full = pool_reports(full);
    std::cout << io::format_ablation_table(pooled_direct, pooled_motion, pooled_full);
    nlohmann::json doc = {{"direct", io::report_to_json(pooled_direct)},
                          {"motion", io::report_to_json(pooled_motion)},
                          {"motion_mask", io::report_to_json(pooled_full)}};
    io::write_file(*report_path, doc.dump(2) + "\n");
    std::cout << "report -> " << *report_path << "\n";
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semfuse: probabilistic semantic fusion of camera score maps and lidar scans"};
  app.require_subcommand(1);
  add_run_command(app);
  add_probabilize_command(app);
  add_fuse_command(app);
  add_evaluate_command(app);
  add_synth_command(app);
  add_ablate_command(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const semfuse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const semfuse::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const semfuse::StageError& e) {
    std::cerr << "stage error [" << e.stage() << "]: " << e.what() << "\n";
    return 4;
  } catch (const semfuse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
