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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "semfuse/errors.hpp"

namespace semfuse {

/// Raw per-pixel per-class CNN activations, class-major then row-major.
struct ScoreMap {
  int classes = 0;
  int height = 0;
  int width = 0;
  std::vector<float> scores;

  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  float at(int c, int y, int x) const { return scores[index(c, y, x)]; }
  float& at(int c, int y, int x) { return scores[index(c, y, x)]; }

  static ScoreMap zeros(int classes, int height, int width) {
    ScoreMap m{classes, height, width, {}};
    m.scores.assign(static_cast<std::size_t>(classes) * height * width, 0.0f);
    return m;
  }
};

/// Hard per-pixel class identifiers (argmax of a score map).
struct LabelImage {
  int classes = 0;
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> labels;  // row-major

  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width + x; }
  std::uint32_t at(int y, int x) const { return labels[index(y, x)]; }
  std::uint32_t& at(int y, int x) { return labels[index(y, x)]; }
};

/// Dense superpixel assignment; identifiers in [0, count).
struct SuperpixelMap {
  int height = 0;
  int width = 0;
  std::uint32_t count = 0;
  std::vector<std::uint32_t> assignment;  // row-major

  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width + x; }
  std::uint32_t at(int y, int x) const { return assignment[index(y, x)]; }
  std::uint32_t& at(int y, int x) { return assignment[index(y, x)]; }

  /// One superpixel spanning the whole image.
  static SuperpixelMap single(int height, int width) {
    SuperpixelMap sp{height, width, 1, {}};
    sp.assignment.assign(static_cast<std::size_t>(height) * width, 0);
    return sp;
  }

  /// Regular grid of cells, `cell` pixels on a side (ragged at the borders).
  static SuperpixelMap grid(int height, int width, int cell) {
    if (cell < 1) {
      throw InvalidParameter("superpixel grid cell must be >= 1");
    }
    SuperpixelMap sp{height, width, 0, {}};
    sp.assignment.resize(static_cast<std::size_t>(height) * width);
    int cols = (width + cell - 1) / cell;
    int rows = (height + cell - 1) / cell;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        sp.at(y, x) = static_cast<std::uint32_t>((y / cell) * cols + (x / cell));
      }
    }
    sp.count = static_cast<std::uint32_t>(rows * cols);
    return sp;
  }
};

/// Share of each superpixel's pixels carrying its modal label, in (0, 1].
struct PredominantFractions {
  std::vector<double> spp;
};

/// Per-pixel class probability vectors; every pixel sums to 1.
struct ProbabilityImage {
  int classes = 0;
  int height = 0;
  int width = 0;
  std::vector<double> probs;  // class-major then row-major

  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  double at(int c, int y, int x) const { return probs[index(c, y, x)]; }
  double& at(int c, int y, int x) { return probs[index(c, y, x)]; }

  static ProbabilityImage zeros(int classes, int height, int width) {
    ProbabilityImage p{classes, height, width, {}};
    p.probs.assign(static_cast<std::size_t>(classes) * height * width, 0.0);
    return p;
  }
};

/// Per-pixel argmax over classes; ties break toward the lowest class index.
inline LabelImage argmax_labels(const ScoreMap& scores) {
  LabelImage out{scores.classes, scores.height, scores.width, {}};
  out.labels.resize(static_cast<std::size_t>(scores.height) * scores.width);
  for (int y = 0; y < scores.height; ++y) {
    for (int x = 0; x < scores.width; ++x) {
      int best = 0;
      float best_score = scores.at(0, y, x);
      for (int c = 1; c < scores.classes; ++c) {
        float s = scores.at(c, y, x);
        if (s > best_score) {
          best_score = s;
          best = c;
        }
      }
      out.at(y, x) = static_cast<std::uint32_t>(best);
    }
  }
  return out;
}

/// Fraction of each superpixel occupied by its most common label.
inline PredominantFractions predominant_fraction(const LabelImage& labels,
                                                 const SuperpixelMap& sp) {
  if (labels.height != sp.height || labels.width != sp.width) {
    throw DimensionMismatch("label image and superpixel map dimensions differ");
  }
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(sp.count) * labels.classes, 0);
  std::vector<std::uint64_t> totals(sp.count, 0);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    std::uint32_t k = sp.assignment[i];
    counts[static_cast<std::size_t>(k) * labels.classes + labels.labels[i]]++;
    totals[k]++;
  }
  PredominantFractions out;
  out.spp.resize(sp.count, 1.0);
  for (std::uint32_t k = 0; k < sp.count; ++k) {
    if (totals[k] == 0) {
      continue;  // empty superpixel id; keep spp = 1 so it is a no-op
    }
    std::uint64_t modal = 0;
    for (int c = 0; c < labels.classes; ++c) {
      modal = std::max(modal, counts[static_cast<std::size_t>(k) * labels.classes + c]);
    }
    out.spp[k] = static_cast<double>(modal) / static_cast<double>(totals[k]);
  }
  return out;
}

/// Softmax temperature for a predominant-label fraction: tau = 1 / spp^2.
inline double temperature_for(double spp) {
  if (!(spp > 0.0) || spp > 1.0) {
    throw InvalidFraction("predominant fraction must lie in (0, 1]");
  }
  return 1.0 / (spp * spp);
}

/// Tempered softmax over a raw score vector, max-subtracted for overflow safety.
/// Writes `classes` probabilities through `out`.
inline void softmax_into(const float* scores, int classes, std::size_t stride, double tau,
                         double* out, std::size_t out_stride) {
  double max_score = scores[0];
  for (int c = 1; c < classes; ++c) {
    max_score = std::max(max_score, static_cast<double>(scores[c * stride]));
  }
  double sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    double e = std::exp((static_cast<double>(scores[c * stride]) - max_score) / tau);
    out[c * out_stride] = e;
    sum += e;
  }
  for (int c = 0; c < classes; ++c) {
    out[c * out_stride] /= sum;
  }
}

/// Per-pixel tempered softmax with the temperature of the pixel's superpixel.
inline ProbabilityImage temperature_softmax(const ScoreMap& scores, const SuperpixelMap& sp,
                                            const PredominantFractions& fractions) {
  if (scores.height != sp.height || scores.width != sp.width) {
    throw DimensionMismatch("score map and superpixel map dimensions differ");
  }
  if (fractions.spp.size() != sp.count) {
    throw DimensionMismatch("fraction vector length differs from superpixel count");
  }
  std::vector<double> taus(fractions.spp.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    taus[k] = temperature_for(fractions.spp[k]);
  }
  ProbabilityImage out{scores.classes, scores.height, scores.width, {}};
  out.probs.resize(static_cast<std::size_t>(scores.classes) * scores.height * scores.width);
  const std::size_t plane = static_cast<std::size_t>(scores.height) * scores.width;
  for (int y = 0; y < scores.height; ++y) {
    for (int x = 0; x < scores.width; ++x) {
      std::size_t pixel = static_cast<std::size_t>(y) * scores.width + x;
      softmax_into(scores.scores.data() + pixel, scores.classes, plane,
                   taus[sp.assignment[pixel]], out.probs.data() + pixel, plane);
    }
  }
  return out;
}

}  // namespace semfuse
