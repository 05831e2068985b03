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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "semfuse/fusion.hpp"
#include "semfuse/synthscene.hpp"

using namespace semfuse;

namespace {

CameraModel identity_camera(const std::string& id) {
  CameraModel m;
  m.id = id;
  m.width = 640;
  m.height = 480;
  m.fx = m.fy = 600;
  m.cx = 320;
  m.cy = 240;
  return m;
}

ProbabilityImage constant_probs(const CameraModel& m, const std::vector<double>& probs) {
  ProbabilityImage img = ProbabilityImage::zeros(static_cast<int>(probs.size()), m.height,
                                                 m.width);
  for (int c = 0; c < img.classes; ++c) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        img.at(c, y, x) = probs[c];
      }
    }
  }
  return img;
}

LidarScan single_point_scan(const Point3& p) {
  LidarScan scan;
  scan.packets.push_back({0.0, {p}});
  return scan;
}

}  // namespace

TEST_CASE("a visible point copies the pixel's probability vector") {
  CameraModel cam = identity_camera("cam0");
  std::map<std::string, ProbabilityImage> images;
  images.emplace("cam0", constant_probs(cam, {0.7, 0.2, 0.1}));
  FusionResult result = fuse_scan(single_point_scan({0, 0, 5}), images, {cam}, {2.0, 0.1},
                                  VisibilityPolicy::masked, {"a", "b", "c"}, 0.25);
  REQUIRE(result.cloud.points.size() == 1);
  const SemanticPoint& sp = result.cloud.points[0];
  CHECK(sp.probs == std::vector<double>{0.7, 0.2, 0.1});
  CHECK(sp.source_camera == "cam0");
  CHECK(sp.source_index == 0);
  CHECK(result.cloud.t_ref == 0.25);
  CHECK(result.counts.visible == 1);
}

TEST_CASE("points behind every camera are dropped but counted") {
  CameraModel cam = identity_camera("cam0");
  std::map<std::string, ProbabilityImage> images;
  images.emplace("cam0", constant_probs(cam, {1.0}));
  FusionResult result = fuse_scan(single_point_scan({0, 0, -4}), images, {cam}, {2.0, 0.1},
                                  VisibilityPolicy::masked, {"a"});
  CHECK(result.cloud.points.empty());
  CHECK(result.counts.behind_camera == 1);
}

TEST_CASE("overlap resolves to the camera with the larger border margin") {
  RigidTransform T_veh_l;  // identity: lidar frame == vehicle frame
  CameraModel a = make_camera("a", {0, 0, 0}, 0.0, T_veh_l);
  // Bearing of the test point; camera b looks straight at it.
  const Point3 p_lidar(5.0, -2.92, 0.0);
  const double bearing_deg = std::atan2(p_lidar.y(), p_lidar.x()) / kDegToRad;
  CameraModel b = make_camera("b", {0, 0, 0}, bearing_deg, T_veh_l);

  // Near the right border of a (small margin), central in b.
  PixelCoord in_a = project(to_camera_frame(p_lidar, a), a);
  PixelCoord in_b = project(to_camera_frame(p_lidar, b), b);
  REQUIRE(in_image(in_a, a));
  REQUIRE(std::min(a.width - 1.0 - in_a.u, in_a.u) < 10.0);
  REQUIRE(std::abs(in_b.u - b.cx) < 1.0);

  std::map<std::string, ProbabilityImage> images;
  images.emplace("a", constant_probs(a, {1.0, 0.0}));
  images.emplace("b", constant_probs(b, {0.0, 1.0}));
  std::vector<CameraModel> models = {a, b};
  FusionResult result = fuse_scan(single_point_scan(p_lidar), images, models, {2.0, 0.1},
                                  VisibilityPolicy::masked, {"x", "y"});
  REQUIRE(result.cloud.points.size() == 1);
  CHECK(result.cloud.points[0].source_camera == "b");
  CHECK(result.cloud.points[0].probs[1] == 1.0);

  // Camera processing order must not matter.
  std::vector<CameraModel> reversed = {b, a};
  FusionResult swapped = fuse_scan(single_point_scan(p_lidar), images, reversed, {2.0, 0.1},
                                   VisibilityPolicy::masked, {"x", "y"});
  CHECK(swapped.cloud.points[0].source_camera == "b");
  CHECK(swapped.cloud.points[0].probs == result.cloud.points[0].probs);
}

TEST_CASE("fusion validates its inputs") {
  CameraModel cam = identity_camera("cam0");
  std::map<std::string, ProbabilityImage> images;
  CHECK_THROWS_AS(fuse_scan(single_point_scan({0, 0, 5}), images, {cam}, {2.0, 0.1}),
                  MissingCamera);
  ProbabilityImage wrong = ProbabilityImage::zeros(2, 100, 100);
  images.emplace("cam0", wrong);
  CHECK_THROWS_AS(fuse_scan(single_point_scan({0, 0, 5}), images, {cam}, {2.0, 0.1}),
                  DimensionMismatch);
}

TEST_CASE("merge sums constituents and renormalizes") {
  SemanticPointCloud cloud;
  cloud.class_names = {"pole", "sign", "road", "sky"};
  SemanticPoint p;
  p.probs = {0.3, 0.2, 0.5, 0.0};
  cloud.points.push_back(p);

  ClassMergeSpec spec;
  spec.mapping = {{"pole", "pole"}, {"sign", "pole"}, {"road", "road"},
                  {"sky", ClassMergeSpec::kDiscard}};
  SemanticPointCloud merged = merge_classes(cloud, spec);
  REQUIRE(merged.class_names == std::vector<std::string>{"pole", "road"});
  REQUIRE(merged.points.size() == 1);
  CHECK(merged.points[0].probs[0] == Catch::Approx(0.5));
  CHECK(merged.points[0].probs[1] == Catch::Approx(0.5));

  // Discarded mass of zero means renormalization is the identity.
  double sum = merged.points[0].probs[0] + merged.points[0].probs[1];
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("points with all mass on discarded classes are dropped") {
  SemanticPointCloud cloud;
  cloud.class_names = {"sky", "road"};
  SemanticPoint p;
  p.probs = {1.0, 0.0};
  cloud.points.push_back(p);
  ClassMergeSpec spec;
  spec.mapping = {{"sky", ClassMergeSpec::kDiscard}, {"road", "road"}};
  CHECK(merge_classes(cloud, spec).points.empty());
}

TEST_CASE("merge requires a complete spec") {
  SemanticPointCloud cloud;
  cloud.class_names = {"a", "b"};
  ClassMergeSpec spec;
  spec.mapping = {{"a", "a"}};
  CHECK_THROWS_AS(merge_classes(cloud, spec), IncompleteSpec);
}

TEST_CASE("default urban merge folds twelve classes into the seven targets") {
  SemanticPointCloud cloud;
  cloud.class_names = urban_class_names();
  SemanticPoint p;
  p.probs.assign(12, 1.0 / 12);
  cloud.points.push_back(p);
  SemanticPointCloud merged = merge_classes(cloud, default_urban_merge());
  CHECK(merged.class_names ==
        std::vector<std::string>{"building", "pole", "road", "undrivable_road", "vegetation",
                                 "vehicle", "pedestrian"});
  double sum = 0;
  for (double v : merged.points[0].probs) sum += v;
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  // pole = pole + sign, both 1/12.
  CHECK(merged.points[0].probs[1] == Catch::Approx(2.0 / 10.0));
}

TEST_CASE("argmax of merged vector maps an unmerged maximal source") {
  SemanticPointCloud cloud;
  cloud.class_names = urban_class_names();
  SemanticPoint p;
  p.probs.assign(12, 0.02);
  p.probs[9] = 0.78;  // vehicle is maximal and maps un-merged
  cloud.points.push_back(p);
  SemanticPointCloud merged = merge_classes(cloud, default_urban_merge());
  std::size_t argmax = 0;
  for (std::size_t c = 1; c < merged.points[0].probs.size(); ++c) {
    if (merged.points[0].probs[c] > merged.points[0].probs[argmax]) argmax = c;
  }
  CHECK(merged.class_names[argmax] == "vehicle");
}
