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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "semfuse/errors.hpp"
#include "semfuse/semantics.hpp"

namespace semfuse {

/// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  std::size_t index(int y, int x) const { return (static_cast<std::size_t>(y) * width + x) * 3; }

  static RgbImage filled(int height, int width, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    RgbImage img{height, width, {}};
    img.data.resize(static_cast<std::size_t>(height) * width * 3);
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
      img.data[i] = r;
      img.data[i + 1] = g;
      img.data[i + 2] = b;
    }
    return img;
  }
};

struct LabColor {
  double l = 0, a = 0, b = 0;
};

/// sRGB (D65) to CIELAB.
inline LabColor rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  auto linearize = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  double r = linearize(r8), g = linearize(g8), b = linearize(b8);
  double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  auto f = [](double t) {
    constexpr double kCube = 216.0 / 24389.0;   // (6/29)^3
    constexpr double kScale = 24389.0 / 2700.0;  // 1 / (3 (6/29)^2)
    return t > kCube ? std::cbrt(t) : kScale * t + 4.0 / 29.0;
  };
  double fx = f(x / 0.95047), fy = f(y), fz = f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

namespace detail {

struct SlicCenter {
  double l = 0, a = 0, b = 0, x = 0, y = 0;
};

/// Relabels 4-connected components, merging fragments smaller than `min_size`
/// into the neighboring component they share the most boundary with.
inline SuperpixelMap enforce_connectivity(const SuperpixelMap& raw, std::size_t min_size) {
  const int h = raw.height, w = raw.width;
  const std::size_t n = static_cast<std::size_t>(h) * w;

  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::size_t> comp_size;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (comp[seed] >= 0) continue;
    std::int32_t id = static_cast<std::int32_t>(comp_size.size());
    std::uint32_t label = raw.assignment[seed];
    std::size_t size = 0;
    stack.push_back(seed);
    comp[seed] = id;
    while (!stack.empty()) {
      std::size_t p = stack.back();
      stack.pop_back();
      ++size;
      int y = static_cast<int>(p) / w, x = static_cast<int>(p) % w;
      const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        std::size_t q = static_cast<std::size_t>(ny) * w + nx;
        if (comp[q] < 0 && raw.assignment[q] == label) {
          comp[q] = id;
          stack.push_back(q);
        }
      }
    }
    comp_size.push_back(size);
  }

  // Union-find over components; repeatedly fold small roots into the neighbor
  // root they touch most until none remain below min_size.
  std::vector<std::int32_t> parent(comp_size.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::int32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };

  bool changed = comp_size.size() > 1;
  while (changed) {
    changed = false;
    std::vector<std::map<std::int32_t, std::size_t>> boundary(comp_size.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::int32_t a = find(comp[static_cast<std::size_t>(y) * w + x]);
        if (x + 1 < w) {
          std::int32_t b = find(comp[static_cast<std::size_t>(y) * w + x + 1]);
          if (a != b) {
            boundary[a][b]++;
            boundary[b][a]++;
          }
        }
        if (y + 1 < h) {
          std::int32_t b = find(comp[static_cast<std::size_t>(y + 1) * w + x]);
          if (a != b) {
            boundary[a][b]++;
            boundary[b][a]++;
          }
        }
      }
    }
    for (std::size_t r = 0; r < comp_size.size(); ++r) {
      std::int32_t root = find(static_cast<std::int32_t>(r));
      if (root != static_cast<std::int32_t>(r)) continue;
      if (comp_size[root] >= min_size || boundary[root].empty()) continue;
      std::int32_t target = -1;
      std::size_t best = 0;
      for (const auto& [other, shared] : boundary[root]) {
        std::int32_t o = find(other);
        if (o == root) continue;
        if (shared > best || (shared == best && (target < 0 || o < target))) {
          best = shared;
          target = o;
        }
      }
      if (target < 0) continue;
      parent[root] = target;
      comp_size[target] += comp_size[root];
      changed = true;
    }
  }

  SuperpixelMap out{h, w, 0, std::vector<std::uint32_t>(n, 0)};
  std::vector<std::int32_t> dense(comp_size.size(), -1);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::int32_t root = find(comp[i]);
    if (dense[root] < 0) {
      dense[root] = static_cast<std::int32_t>(next++);
    }
    out.assignment[i] = static_cast<std::uint32_t>(dense[root]);
  }
  out.count = next;
  return out;
}

}  // namespace detail

/// SLIC superpixel segmentation in CIELAB with grid-seeded cluster centers,
/// windowed assignment, and a connectivity pass that absorbs fragments smaller
/// than S^2/4 into their dominant neighbor.
inline SuperpixelMap slic_segment(const RgbImage& image, int target_count, double compactness,
                                  int iterations) {
  const int h = image.height, w = image.width;
  if (h <= 0 || w <= 0 || image.data.size() != static_cast<std::size_t>(h) * w * 3) {
    throw EmptyImage("slic_segment requires a non-empty RGB image");
  }
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (target_count < 1 || static_cast<std::size_t>(target_count) > n) {
    throw InvalidParameter("superpixel count must lie in [1, pixel count]");
  }
  if (!(compactness > 0.0)) {
    throw InvalidParameter("compactness must be positive");
  }

  std::vector<LabColor> lab(n);
  for (std::size_t i = 0; i < n; ++i) {
    lab[i] = rgb_to_lab(image.data[3 * i], image.data[3 * i + 1], image.data[3 * i + 2]);
  }

  const double step = std::sqrt(static_cast<double>(n) / target_count);
  std::vector<detail::SlicCenter> centers;
  for (double cy = step / 2.0; cy < h; cy += step) {
    for (double cx = step / 2.0; cx < w; cx += step) {
      int px = std::min(static_cast<int>(cx), w - 1);
      int py = std::min(static_cast<int>(cy), h - 1);
      const LabColor& c = lab[static_cast<std::size_t>(py) * w + px];
      centers.push_back({c.l, c.a, c.b, static_cast<double>(px), static_cast<double>(py)});
    }
  }

  std::vector<std::uint32_t> assignment(n, 0);
  std::vector<double> best_dist(n);
  const double spatial_weight = (compactness * compactness) / (step * step);
  for (int iter = 0; iter < iterations; ++iter) {
    std::fill(best_dist.begin(), best_dist.end(), std::numeric_limits<double>::max());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const detail::SlicCenter& c = centers[k];
      int x0 = std::max(0, static_cast<int>(c.x - step));
      int x1 = std::min(w - 1, static_cast<int>(c.x + step));
      int y0 = std::max(0, static_cast<int>(c.y - step));
      int y1 = std::min(h - 1, static_cast<int>(c.y + step));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          std::size_t p = static_cast<std::size_t>(y) * w + x;
          double dl = lab[p].l - c.l, da = lab[p].a - c.a, db = lab[p].b - c.b;
          double dx = x - c.x, dy = y - c.y;
          double d = dl * dl + da * da + db * db + spatial_weight * (dx * dx + dy * dy);
          if (d < best_dist[p]) {
            best_dist[p] = d;
            assignment[p] = static_cast<std::uint32_t>(k);
          }
        }
      }
    }
    // Stray pixels outside every search window: nearest center spatially.
    for (std::size_t p = 0; p < n; ++p) {
      if (best_dist[p] != std::numeric_limits<double>::max()) continue;
      int y = static_cast<int>(p) / w, x = static_cast<int>(p) % w;
      double best = std::numeric_limits<double>::max();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        double dx = x - centers[k].x, dy = y - centers[k].y;
        double d = dx * dx + dy * dy;
        if (d < best) {
          best = d;
          assignment[p] = static_cast<std::uint32_t>(k);
        }
      }
    }
    std::vector<detail::SlicCenter> sums(centers.size());
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      detail::SlicCenter& s = sums[assignment[p]];
      s.l += lab[p].l;
      s.a += lab[p].a;
      s.b += lab[p].b;
      s.x += static_cast<double>(p % w);
      s.y += static_cast<double>(p / w);
      counts[assignment[p]]++;
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      double inv = 1.0 / static_cast<double>(counts[k]);
      centers[k] = {sums[k].l * inv, sums[k].a * inv, sums[k].b * inv, sums[k].x * inv,
                    sums[k].y * inv};
    }
  }

  SuperpixelMap raw{h, w, static_cast<std::uint32_t>(centers.size()), std::move(assignment)};
  const std::size_t min_size = static_cast<std::size_t>(step * step / 4.0);
  return detail::enforce_connectivity(raw, min_size);
}

}  // namespace semfuse
