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
#include <random>

#include "semfuse/semantics.hpp"

using namespace semfuse;

namespace {

ScoreMap single_pixel(std::initializer_list<float> scores) {
  ScoreMap m = ScoreMap::zeros(static_cast<int>(scores.size()), 1, 1);
  int c = 0;
  for (float s : scores) m.at(c++, 0, 0) = s;
  return m;
}

std::vector<double> softmax_pixel(std::initializer_list<float> scores, double spp) {
  ScoreMap m = single_pixel(scores);
  SuperpixelMap sp = SuperpixelMap::single(1, 1);
  ProbabilityImage p = temperature_softmax(m, sp, {{spp}});
  std::vector<double> out(m.classes);
  for (int c = 0; c < m.classes; ++c) out[c] = p.at(c, 0, 0);
  return out;
}

double entropy(const std::vector<double>& p) {
  double h = 0;
  for (double v : p) {
    if (v > 0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

TEST_CASE("argmax labels") {
  ScoreMap m = single_pixel({0.1f, 2.0f, -1.0f});
  CHECK(argmax_labels(m).at(0, 0) == 1);

  ScoreMap ties = single_pixel({3.0f, 3.0f, 3.0f});
  CHECK(argmax_labels(ties).at(0, 0) == 0);
}

TEST_CASE("argmax matches exhaustive scan on a random map") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  ScoreMap m = ScoreMap::zeros(3, 4, 4);
  for (auto& s : m.scores) s = u(rng);
  LabelImage out = argmax_labels(m);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      int best = 0;
      for (int c = 0; c < 3; ++c) {
        if (m.at(c, y, x) > m.at(best, y, x)) best = c;
      }
      CHECK(out.at(y, x) == static_cast<std::uint32_t>(best));
    }
  }
}

TEST_CASE("predominant fraction") {
  LabelImage labels{4, 10, 10, std::vector<std::uint32_t>(100, 3)};
  SuperpixelMap sp = SuperpixelMap::single(10, 10);
  CHECK(predominant_fraction(labels, sp).spp[0] == 1.0);

  // 100-pixel superpixel: 80 pixels of class 1, 20 of class 2.
  for (std::size_t i = 0; i < 100; ++i) labels.labels[i] = i < 80 ? 1 : 2;
  CHECK(predominant_fraction(labels, sp).spp[0] == Catch::Approx(0.8));

  // Even split resolves to 0.5 regardless of which label wins the mode.
  LabelImage even{2, 1, 10, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}};
  SuperpixelMap sp10 = SuperpixelMap::single(1, 10);
  CHECK(predominant_fraction(even, sp10).spp[0] == Catch::Approx(0.5));
}

TEST_CASE("predominant fraction rejects mismatched dimensions") {
  LabelImage labels{2, 4, 4, std::vector<std::uint32_t>(16, 0)};
  SuperpixelMap sp = SuperpixelMap::single(4, 5);
  CHECK_THROWS_AS(predominant_fraction(labels, sp), DimensionMismatch);
}

TEST_CASE("temperature follows the inverse-square rule") {
  CHECK(temperature_for(1.0) == 1.0);
  CHECK(temperature_for(0.5) == 4.0);
  CHECK(temperature_for(0.8) == Catch::Approx(1.5625).margin(1e-15));
  CHECK_THROWS_AS(temperature_for(0.0), InvalidFraction);
  CHECK_THROWS_AS(temperature_for(-0.2), InvalidFraction);
  CHECK_THROWS_AS(temperature_for(1.2), InvalidFraction);
}

TEST_CASE("tempered softmax reference values") {
  auto p1 = softmax_pixel({1.0f, 0.0f}, 1.0);
  CHECK(p1[0] == Catch::Approx(0.73106).margin(1e-5));
  CHECK(p1[1] == Catch::Approx(0.26894).margin(1e-5));

  auto p4 = softmax_pixel({2.0f, 0.0f}, 0.5);  // spp 0.5 -> tau 4
  CHECK(p4[0] == Catch::Approx(0.62246).margin(1e-5));
  CHECK(p4[1] == Catch::Approx(0.37754).margin(1e-5));

  auto flat = softmax_pixel({5.0f, 5.0f, 5.0f}, 0.7);
  for (double v : flat) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("softmax properties over random score vectors") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> u(-10.0f, 10.0f);
  std::uniform_int_distribution<int> classes_dist(2, 12);
  const std::vector<double> spps = {1.0, 0.8, 0.5, 0.25};
  for (int trial = 0; trial < 300; ++trial) {
    int classes = classes_dist(rng);
    ScoreMap m = ScoreMap::zeros(classes, 1, 1);
    for (auto& s : m.scores) s = u(rng);
    LabelImage lab = argmax_labels(m);
    double prev_entropy = -1.0;
    for (double spp : spps) {
      SuperpixelMap sp = SuperpixelMap::single(1, 1);
      ProbabilityImage p = temperature_softmax(m, sp, {{spp}});
      std::vector<double> v(classes);
      double sum = 0;
      for (int c = 0; c < classes; ++c) {
        v[c] = p.at(c, 0, 0);
        CHECK(v[c] >= 0.0);
        CHECK(v[c] <= 1.0);
        sum += v[c];
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
      int argmax = 0;
      for (int c = 1; c < classes; ++c) {
        if (v[c] > v[argmax]) argmax = c;
      }
      CHECK(static_cast<std::uint32_t>(argmax) == lab.at(0, 0));
      double h = entropy(v);
      CHECK(h > prev_entropy);
      prev_entropy = h;
    }
  }
}

TEST_CASE("spp=1 path is bit-identical to plain softmax") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<float> u(-700.0f, 700.0f);
  for (int trial = 0; trial < 100; ++trial) {
    ScoreMap m = ScoreMap::zeros(6, 1, 1);
    for (auto& s : m.scores) s = u(rng);
    SuperpixelMap sp = SuperpixelMap::single(1, 1);
    ProbabilityImage tempered = temperature_softmax(m, sp, {{1.0}});
    // Plain stable softmax, written out directly.
    double mx = m.scores[0];
    for (float s : m.scores) mx = std::max(mx, static_cast<double>(s));
    double sum = 0;
    std::vector<double> plain(6);
    for (int c = 0; c < 6; ++c) {
      plain[c] = std::exp(static_cast<double>(m.scores[c]) - mx);
      sum += plain[c];
    }
    for (int c = 0; c < 6; ++c) {
      CHECK(tempered.at(c, 0, 0) == plain[c] / sum);
    }
  }
}

TEST_CASE("extreme score magnitudes stay finite") {
  auto p = softmax_pixel({900.0f, -900.0f, 0.0f}, 1.0);
  double sum = 0;
  for (double v : p) {
    CHECK(std::isfinite(v));
    sum += v;
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("tempered softmax rejects mismatched inputs") {
  ScoreMap m = ScoreMap::zeros(3, 2, 2);
  SuperpixelMap sp = SuperpixelMap::single(2, 3);
  CHECK_THROWS_AS(temperature_softmax(m, sp, {{1.0}}), DimensionMismatch);
  SuperpixelMap ok = SuperpixelMap::single(2, 2);
  CHECK_THROWS_AS(temperature_softmax(m, ok, {{1.0, 0.5}}), DimensionMismatch);
}
