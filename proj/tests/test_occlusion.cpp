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
#include <map>
#include <random>

#include "semfuse/occlusion.hpp"

using namespace semfuse;

namespace {

CameraModel vlp_like_model() {
  CameraModel m;
  m.id = "cam";
  m.width = 640;
  m.height = 480;
  m.fx = 1000;
  m.fy = 1000;
  m.cx = 320;
  m.cy = 240;
  return m;
}

}  // namespace

TEST_CASE("gap formula reproduces the VLP-16 mask dimensions") {
  CameraModel m = vlp_like_model();
  m.fx = 1718.9;
  m.fy = 1174.2;
  PixelGaps g = gap_pixels(m, {2.0, 0.1});
  CHECK(g.u_gap == 3);
  CHECK(g.v_gap == 41);
}

TEST_CASE("gap formula hand values and clamping") {
  CameraModel m = vlp_like_model();
  PixelGaps g = gap_pixels(m, {2.0, 0.1});
  CHECK(g.v_gap == 35);  // round(1000 * tan 2 deg)
  PixelGaps tiny = gap_pixels(m, {1e-6, 1e-6});
  CHECK(tiny.u_gap == 1);
  CHECK(tiny.v_gap == 1);
  // Even rounds get widened to the next odd so masks center on a pixel.
  m.fx = m.fy = 1000;
  PixelGaps even = gap_pixels(m, {2.292, 2.292});  // tan -> 0.04002, rounds to 40
  CHECK(even.u_gap % 2 == 1);
  CHECK(even.v_gap % 2 == 1);
}

TEST_CASE("nearer point on the same ray masks the farther one") {
  CameraModel m = vlp_like_model();
  std::vector<Point3> pts = {Point3(0, 0, 10), Point3(0, 0, 5)};
  VisibilityResult r = visibility_filter(pts, m, {2.0, 0.1});
  CHECK(r.state[0] == Visibility::occluded);
  CHECK(r.state[1] == Visibility::visible);
}

TEST_CASE("single point in the frustum is visible") {
  CameraModel m = vlp_like_model();
  std::vector<Point3> pts = {Point3(0.5, -0.2, 4)};
  VisibilityResult r = visibility_filter(pts, m, {2.0, 0.1});
  CHECK(r.state[0] == Visibility::visible);
  CHECK(r.count(Visibility::visible) == 1);
}

TEST_CASE("states partition the input") {
  CameraModel m = vlp_like_model();
  std::vector<Point3> pts = {
      Point3(0, 0, 5),     // visible
      Point3(0, 0, 9),     // occluded behind the first
      Point3(0, 0, -3),    // behind camera
      Point3(50, 0, 1),    // projects far outside the image
  };
  VisibilityResult r = visibility_filter(pts, m, {2.0, 0.1});
  CHECK(r.state[0] == Visibility::visible);
  CHECK(r.state[1] == Visibility::occluded);
  CHECK(r.state[2] == Visibility::behind_camera);
  CHECK(r.state[3] == Visibility::out_of_view);
  CHECK(r.count(Visibility::visible) + r.count(Visibility::occluded) +
            r.count(Visibility::out_of_view) + r.count(Visibility::behind_camera) ==
        pts.size());
  CHECK(std::isnan(r.pixel[2].u));
  CHECK(r.pixel[0].u == Catch::Approx(320.0));
}

TEST_CASE("coincident points resolve by input order") {
  CameraModel m = vlp_like_model();
  std::vector<Point3> pts = {Point3(1, 1, 6), Point3(1, 1, 6)};
  VisibilityResult r = visibility_filter(pts, m, {2.0, 0.1});
  CHECK(r.state[0] == Visibility::visible);
  CHECK(r.state[1] == Visibility::occluded);
}

TEST_CASE("filter is deterministic") {
  CameraModel m = vlp_like_model();
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < 500; ++i) {
    pts.emplace_back(u(rng) * 3, u(rng) * 3, 2.0 + 10.0 * std::abs(u(rng)));
  }
  VisibilityResult a = visibility_filter(pts, m, {2.0, 0.1});
  VisibilityResult b = visibility_filter(pts, m, {2.0, 0.1});
  CHECK(a.state == b.state);
}

TEST_CASE("adding a farther point never occludes existing ones") {
  CameraModel m = vlp_like_model();
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < 200; ++i) {
    pts.emplace_back(u(rng), u(rng), 2.0 + 5.0 * std::abs(u(rng)));
  }
  VisibilityResult before = visibility_filter(pts, m, {2.0, 0.1});
  pts.emplace_back(0.1, 0.1, 100.0);  // farther than everything else
  VisibilityResult after = visibility_filter(pts, m, {2.0, 0.1});
  for (std::size_t i = 0; i < before.state.size(); ++i) {
    if (before.state[i] == Visibility::visible) {
      CHECK(after.state[i] == Visibility::visible);
    }
  }
}

TEST_CASE("a visible point is the strictly nearest of its pixel") {
  CameraModel m = vlp_like_model();
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> depth(1.0, 30.0);
  std::vector<Point3> pts;
  for (int i = 0; i < 1000; ++i) {
    pts.emplace_back(u(rng), u(rng), depth(rng));
  }
  VisibilityResult r = visibility_filter(pts, m, {2.0, 0.1});
  std::map<std::pair<long, long>, std::size_t> nearest;
  std::map<std::pair<long, long>, int> visible_per_cell;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (r.state[i] == Visibility::behind_camera || r.state[i] == Visibility::out_of_view) {
      continue;
    }
    std::pair<long, long> cell{round_pixel(r.pixel[i].u), round_pixel(r.pixel[i].v)};
    auto it = nearest.find(cell);
    if (it == nearest.end() || pts[i].squaredNorm() < pts[it->second].squaredNorm()) {
      nearest[cell] = i;
    }
    if (r.state[i] == Visibility::visible) visible_per_cell[cell]++;
  }
  for (const auto& [cell, count] : visible_per_cell) {
    CHECK(count == 1);
    // The single visible point of a cell is its strictly nearest point;
    // neighboring masks may reject the whole cell, never reorder it.
    CHECK(r.state[nearest.at(cell)] == Visibility::visible);
  }
}

TEST_CASE("nearest point per pixel is visible when masks do not interact") {
  CameraModel m = vlp_like_model();
  GapSpec gaps{2.0, 0.1};
  PixelGaps pg = gap_pixels(m, gaps);
  // Points laid out farther apart than a mask, two depths per pixel column.
  std::vector<Point3> pts;
  std::vector<std::size_t> near_index;
  for (int i = -3; i <= 3; ++i) {
    double x = i * 2.0 * pg.u_gap / m.fx;
    double y = i * 2.0 * pg.v_gap / m.fy;
    near_index.push_back(pts.size());
    pts.emplace_back(Point3(x, y, 1.0) * 5.0);
    pts.emplace_back(Point3(x, y, 1.0) * 12.0);  // same ray, farther
  }
  VisibilityResult r = visibility_filter(pts, m, gaps);
  for (std::size_t i : near_index) {
    CHECK(r.state[i] == Visibility::visible);
    CHECK(r.state[i + 1] == Visibility::occluded);
  }
}

TEST_CASE("mask accounting bounds occupancy") {
  CameraModel m = vlp_like_model();
  GapSpec gaps{2.0, 0.1};
  PixelGaps pg = gap_pixels(m, gaps);

  // Far apart points: no overlap, no clipping; equality holds.
  std::vector<Point3> sparse = {Point3(0, 0, 10), Point3(1.5, 0, 10), Point3(0, 1.5, 10)};
  VisibilityResult r = visibility_filter(sparse, m, gaps);
  MaskGrid grid(m.width, m.height);
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    if (r.state[i] == Visibility::visible) {
      grid.stamp(round_pixel(r.pixel[i].u), round_pixel(r.pixel[i].v), pg);
    }
  }
  CHECK(grid.occupied_count() ==
        r.count(Visibility::visible) * static_cast<std::size_t>(pg.u_gap) * pg.v_gap);

  // Overlapping points: strictly fewer cells than the naive product.
  std::vector<Point3> dense = {Point3(0, 0, 10), Point3(0.001, 0.02, 11)};
  VisibilityResult rd = visibility_filter(dense, m, gaps);
  std::size_t visible = rd.count(Visibility::visible);
  MaskGrid grid2(m.width, m.height);
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (rd.state[i] == Visibility::visible) {
      grid2.stamp(round_pixel(rd.pixel[i].u), round_pixel(rd.pixel[i].v), pg);
    }
  }
  CHECK(grid2.occupied_count() <= visible * static_cast<std::size_t>(pg.u_gap) * pg.v_gap);
}

TEST_CASE("frustum filter never occludes") {
  CameraModel m = vlp_like_model();
  std::vector<Point3> pts = {Point3(0, 0, 5), Point3(0, 0, 10), Point3(0, 0, -1)};
  VisibilityResult r = frustum_filter(pts, m);
  CHECK(r.state[0] == Visibility::visible);
  CHECK(r.state[1] == Visibility::visible);
  CHECK(r.state[2] == Visibility::behind_camera);
}
