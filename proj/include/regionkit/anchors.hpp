// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "regionkit/box.hpp"
#include "regionkit/errors.hpp"

namespace regionkit {

/// The anchor lattice parameters: one anchor per (cell, scale, ratio)
/// triple on a feature map whose cells are `stride` image pixels apart.
/// An anchor of scale s has area (s*stride)^2, so the default scales
/// {8, 16, 32} with stride 16 give 128/256/512-pixel nominal sizes.
struct AnchorSpec {
  std::vector<double> scales{8.0, 16.0, 32.0};
  std::vector<double> aspect_ratios{0.5, 1.0, 2.0};
  double stride{16.0};

  void validate() const {
    if (scales.empty() || aspect_ratios.empty()) {
      throw InvalidConfigError("anchor spec: empty scale or ratio list");
    }
    for (double s : scales) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw InvalidConfigError("anchor spec: scales must be positive");
      }
    }
    for (double r : aspect_ratios) {
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw InvalidConfigError("anchor spec: ratios must be positive");
      }
    }
    if (!(stride > 0.0) || !std::isfinite(stride)) {
      throw InvalidConfigError("anchor spec: stride must be positive");
    }
  }

  std::size_t num_buckets() const { return scales.size(); }

  double nominal_size(std::size_t bucket) const {
    return scales[bucket] * stride;
  }
};

/// The anchor scale a box is assigned to.
struct ScaleBucket {
  std::size_t index{0};
  double nominal_size{0.0};
};

/// Dense anchor grid over a feat_width x feat_height map. Cell centers
/// sit at ((i+0.5)*stride, (j+0.5)*stride) so coverage is symmetric.
/// Ordering is row-major over cells, then ratios, then scales; anchors
/// are not clipped to any image.
inline std::vector<Boxd> generate_anchors(const AnchorSpec& spec,
                                          int feat_width, int feat_height) {
  spec.validate();
  if (feat_width < 1 || feat_height < 1) {
    throw InvalidInputError("generate_anchors: feature map must be >= 1x1");
  }
  std::vector<Boxd> anchors;
  anchors.reserve(static_cast<std::size_t>(feat_width) * feat_height *
                  spec.scales.size() * spec.aspect_ratios.size());
  for (int j = 0; j < feat_height; ++j) {
    for (int i = 0; i < feat_width; ++i) {
      const double cx = (i + 0.5) * spec.stride;
      const double cy = (j + 0.5) * spec.stride;
      for (double ratio : spec.aspect_ratios) {
        for (double scale : spec.scales) {
          const double side = scale * spec.stride;
          // area (s*stride)^2, width/height = ratio
          const double w = side * std::sqrt(ratio);
          const double h = side / std::sqrt(ratio);
          anchors.emplace_back(cx - w / 2, cy - h / 2, cx + w / 2,
                               cy + h / 2);
        }
      }
    }
  }
  return anchors;
}

/// Assigns a box to the scale whose nominal size is nearest to
/// sqrt(area) in log2 space, ties toward the smaller scale. Every
/// generated anchor maps back to its own scale (its sqrt-area is
/// exactly the nominal size).
template <typename T>
ScaleBucket scale_bucket_of(const Box<T>& b, const AnchorSpec& spec) {
  spec.validate();
  const double area = static_cast<double>(b.area());
  if (!(area > 0.0)) {
    throw DegenerateBoxError("scale_bucket_of: box has zero area");
  }
  const double log_size = std::log2(area) / 2.0;  // log2(sqrt(area))
  std::size_t best = 0;
  double best_dist = std::abs(log_size - std::log2(spec.nominal_size(0)));
  for (std::size_t i = 1; i < spec.num_buckets(); ++i) {
    const double dist = std::abs(log_size - std::log2(spec.nominal_size(i)));
    if (dist < best_dist ||
        (dist == best_dist &&
         spec.nominal_size(i) < spec.nominal_size(best))) {
      best = i;
      best_dist = dist;
    }
  }
  return ScaleBucket{best, spec.nominal_size(best)};
}

}  // namespace regionkit
