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
#include <random>
#include <set>
#include <vector>

#include "semfuse/slic.hpp"

using namespace semfuse;

namespace {

// Sizes of the 4-connected components of each superpixel id, via flood fill.
std::vector<std::size_t> component_sizes(const SuperpixelMap& sp) {
  std::vector<bool> seen(sp.assignment.size(), false);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < sp.assignment.size(); ++seed) {
    if (seen[seed]) continue;
    std::uint32_t id = sp.assignment[seed];
    std::size_t size = 0;
    stack.push_back(seed);
    seen[seed] = true;
    while (!stack.empty()) {
      std::size_t p = stack.back();
      stack.pop_back();
      ++size;
      int y = static_cast<int>(p) / sp.width, x = static_cast<int>(p) % sp.width;
      const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= sp.width || ny >= sp.height) continue;
        std::size_t q = static_cast<std::size_t>(ny) * sp.width + nx;
        if (!seen[q] && sp.assignment[q] == id) {
          seen[q] = true;
          stack.push_back(q);
        }
      }
    }
    sizes.push_back(size);
  }
  return sizes;
}

}  // namespace

TEST_CASE("uniform image splits into grid-dominated superpixels") {
  RgbImage img = RgbImage::filled(100, 100, 128, 128, 128);
  SuperpixelMap sp = slic_segment(img, 4, 10.0, 10);
  REQUIRE(sp.count == 4);
  std::vector<std::size_t> sizes(4, 0);
  for (std::uint32_t id : sp.assignment) sizes[id]++;
  for (std::size_t s : sizes) {
    CHECK(s > 2000);
    CHECK(s < 3000);
  }
  // Each superpixel is one connected blob.
  CHECK(component_sizes(sp).size() == 4);
}

TEST_CASE("degenerate K equal to pixel count") {
  RgbImage img = RgbImage::filled(8, 8, 10, 200, 30);
  SuperpixelMap sp = slic_segment(img, 64, 10.0, 5);
  CHECK(sp.count == 64);
  std::set<std::uint32_t> distinct(sp.assignment.begin(), sp.assignment.end());
  CHECK(distinct.size() == 64);
}

TEST_CASE("low compactness follows a color edge") {
  RgbImage img = RgbImage::filled(60, 120, 0, 0, 0);
  for (int y = 0; y < 60; ++y) {
    for (int x = 60; x < 120; ++x) {
      std::size_t i = img.index(y, x);
      img.data[i] = img.data[i + 1] = img.data[i + 2] = 255;
    }
  }
  SuperpixelMap sp = slic_segment(img, 2, 1.0, 10);
  REQUIRE(sp.count == 2);
  // The boundary between the two superpixels must hug x=60 within 2 px.
  for (int y = 0; y < 60; ++y) {
    for (int x = 0; x < 119; ++x) {
      if (sp.at(y, x) != sp.at(y, x + 1)) {
        CHECK(x >= 58);
        CHECK(x <= 61);
      }
    }
  }
}

TEST_CASE("assignment is total, dense, and connected") {
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> u(0, 255);
  RgbImage img = RgbImage::filled(48, 64, 0, 0, 0);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(u(rng));
  SuperpixelMap sp = slic_segment(img, 50, 10.0, 10);

  std::set<std::uint32_t> distinct(sp.assignment.begin(), sp.assignment.end());
  REQUIRE(!distinct.empty());
  CHECK(*distinct.rbegin() == sp.count - 1);
  CHECK(distinct.size() == sp.count);

  // 4-connectivity: every id forms exactly one component, and no fragment
  // smaller than S^2/4 survives.
  std::vector<std::size_t> comps = component_sizes(sp);
  CHECK(comps.size() == sp.count);
  double step2 = (48.0 * 64.0) / 50.0;
  for (std::size_t s : comps) CHECK(s >= static_cast<std::size_t>(step2 / 4.0));
}

TEST_CASE("slic rejects bad inputs") {
  RgbImage empty;
  CHECK_THROWS_AS(slic_segment(empty, 4, 10.0, 10), EmptyImage);
  RgbImage img = RgbImage::filled(4, 4, 0, 0, 0);
  CHECK_THROWS_AS(slic_segment(img, 17, 10.0, 10), InvalidParameter);
  CHECK_THROWS_AS(slic_segment(img, 0, 10.0, 10), InvalidParameter);
  CHECK_THROWS_AS(slic_segment(img, 4, 0.0, 10), InvalidParameter);
}
