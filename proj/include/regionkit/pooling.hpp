// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "regionkit/box.hpp"
#include "regionkit/errors.hpp"

namespace regionkit {

template <typename T>
using GridMap =
    Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::RowMajor>>;
template <typename T>
using MutableGridMap =
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic,
                            Eigen::RowMajor>>;

/// Dense C x H x W grid of real values, channel-major: data[c*H*W + y*W + x].
template <typename T>
struct FeatureMap {
  int channels{0};
  int height{0};
  int width{0};
  std::vector<T> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, T fill = T(0))
      : channels(c), height(h), width(w) {
    if (c < 1 || h < 1 || w < 1) {
      throw InvalidInputError("feature map dimensions must be positive");
    }
    data.assign(static_cast<std::size_t>(c) * h * w, fill);
  }

  T& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  T at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  GridMap<T> channel(int c) const {
    return GridMap<T>(data.data() + static_cast<std::size_t>(c) * height * width,
                      height, width);
  }
  MutableGridMap<T> channel(int c) {
    return MutableGridMap<T>(
        data.data() + static_cast<std::size_t>(c) * height * width, height,
        width);
  }
};

using FeatureMapf = FeatureMap<float>;
using FeatureMapd = FeatureMap<double>;

/// Fixed S x S grid per channel produced by the pooling operators,
/// channel-major like FeatureMap.
template <typename T>
struct PooledFeature {
  int channels{0};
  int size{0};
  std::vector<T> data;

  PooledFeature() = default;
  PooledFeature(int c, int s, T fill = T(0)) : channels(c), size(s) {
    if (c < 1 || s < 1) {
      throw InvalidInputError("pooled feature dimensions must be positive");
    }
    data.assign(static_cast<std::size_t>(c) * s * s, fill);
  }

  T& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * size + y) * size + x];
  }
  T at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * size + y) * size + x];
  }

  GridMap<T> channel(int c) const {
    return GridMap<T>(data.data() + static_cast<std::size_t>(c) * size * size,
                      size, size);
  }
  MutableGridMap<T> channel(int c) {
    return MutableGridMap<T>(
        data.data() + static_cast<std::size_t>(c) * size * size, size, size);
  }
};

using PooledFeaturef = PooledFeature<float>;
using PooledFeatured = PooledFeature<double>;

namespace detail {

// One bilinear sample axis: tap indices clamped to [0, n) and the
// fractional weight of the upper tap. Weights always sum to 1, so the
// sampler is a partition of unity even at the borders.
template <typename T>
struct AxisTap {
  int lo;
  int hi;
  T frac;
};

template <typename T>
AxisTap<T> axis_tap(T coord, int n) {
  const T floored = std::floor(coord);
  const int lo = static_cast<int>(floored);
  AxisTap<T> tap;
  tap.frac = coord - floored;
  tap.lo = std::clamp(lo, 0, n - 1);
  tap.hi = std::clamp(lo + 1, 0, n - 1);
  return tap;
}

// Sample coordinate i of a crop_size grid spanning [lo, hi]; for
// crop_size > 1 the endpoints coincide with the RoI corners, for
// crop_size == 1 the single sample sits at the center.
template <typename T>
T sample_coord(T lo, T hi, int i, int crop_size) {
  if (crop_size == 1) return (lo + hi) / T(2);
  return lo + T(i) * (hi - lo) / T(crop_size - 1);
}

template <typename T>
void check_roi(const Box<T>& roi) {
  if (!(std::isfinite(roi.x1) && std::isfinite(roi.y1) &&
        std::isfinite(roi.x2) && std::isfinite(roi.y2))) {
    throw InvalidInputError("roi has non-finite coordinates");
  }
}

}  // namespace detail

/// Bilinear crop of a feature map to a crop_size x crop_size grid whose
/// corner sample points coincide with the RoI corners. Out-of-bounds
/// taps clamp to the nearest edge value; channels are independent. The
/// output is a linear function of the feature values for a fixed RoI.
template <typename T>
PooledFeature<T> crop_and_resize(const FeatureMap<T>& fm, const Box<T>& roi,
                                 int crop_size) {
  if (crop_size < 1) throw InvalidInputError("crop_size must be >= 1");
  detail::check_roi(roi);
  PooledFeature<T> out(fm.channels, crop_size);
  std::vector<detail::AxisTap<T>> xs(crop_size), ys(crop_size);
  for (int i = 0; i < crop_size; ++i) {
    xs[i] = detail::axis_tap(
        detail::sample_coord(roi.x1, roi.x2, i, crop_size), fm.width);
    ys[i] = detail::axis_tap(
        detail::sample_coord(roi.y1, roi.y2, i, crop_size), fm.height);
  }
  // lerp as a + f*(b-a): a constant map reproduces exactly and samples
  // never leave [min, max] of the tap values
  const auto lerp = [](T a, T b, T f) { return a + f * (b - a); };
  for (int c = 0; c < fm.channels; ++c) {
    for (int y = 0; y < crop_size; ++y) {
      const auto& ty = ys[y];
      for (int x = 0; x < crop_size; ++x) {
        const auto& tx = xs[x];
        const T top =
            lerp(fm.at(c, ty.lo, tx.lo), fm.at(c, ty.lo, tx.hi), tx.frac);
        const T bottom =
            lerp(fm.at(c, ty.hi, tx.lo), fm.at(c, ty.hi, tx.hi), tx.frac);
        out.at(c, y, x) = lerp(top, bottom, ty.frac);
      }
    }
  }
  return out;
}

/// Gradient of crop_and_resize with respect to the feature values: the
/// transpose of the forward 4-tap bilinear operator applied to the
/// upstream gradient. Geometry must match the forward call.
template <typename T>
FeatureMap<T> crop_and_resize_backward(int channels, int height, int width,
                                       const Box<T>& roi, int crop_size,
                                       const PooledFeature<T>& upstream) {
  if (crop_size < 1) throw InvalidInputError("crop_size must be >= 1");
  detail::check_roi(roi);
  if (upstream.channels != channels || upstream.size != crop_size) {
    throw InvalidInputError(
        "crop_and_resize_backward: upstream gradient shape mismatch");
  }
  FeatureMap<T> grad(channels, height, width, T(0));
  std::vector<detail::AxisTap<T>> xs(crop_size), ys(crop_size);
  for (int i = 0; i < crop_size; ++i) {
    xs[i] = detail::axis_tap(detail::sample_coord(roi.x1, roi.x2, i, crop_size),
                             width);
    ys[i] = detail::axis_tap(detail::sample_coord(roi.y1, roi.y2, i, crop_size),
                             height);
  }
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < crop_size; ++y) {
      const auto& ty = ys[y];
      for (int x = 0; x < crop_size; ++x) {
        const auto& tx = xs[x];
        const T g = upstream.at(c, y, x);
        grad.at(c, ty.lo, tx.lo) += g * (T(1) - ty.frac) * (T(1) - tx.frac);
        grad.at(c, ty.lo, tx.hi) += g * (T(1) - ty.frac) * tx.frac;
        grad.at(c, ty.hi, tx.lo) += g * ty.frac * (T(1) - tx.frac);
        grad.at(c, ty.hi, tx.hi) += g * ty.frac * tx.frac;
      }
    }
  }
  return grad;
}

/// Classic RoI max-pooling: the RoI is quantized to integer cell bounds
/// (floor start, ceil end), partitioned into out_size x out_size bins by
/// integer division, and max-reduced per bin. Empty bins produce 0.
template <typename T>
PooledFeature<T> roi_pool(const FeatureMap<T>& fm, const Box<T>& roi,
                          int out_size) {
  if (out_size < 1) throw InvalidInputError("out_size must be >= 1");
  detail::check_roi(roi);
  PooledFeature<T> out(fm.channels, out_size, T(0));
  const int x_start = std::clamp(
      static_cast<int>(std::floor(roi.x1)), 0, fm.width);
  const int x_end = std::clamp(
      static_cast<int>(std::ceil(roi.x2)), 0, fm.width);
  const int y_start = std::clamp(
      static_cast<int>(std::floor(roi.y1)), 0, fm.height);
  const int y_end = std::clamp(
      static_cast<int>(std::ceil(roi.y2)), 0, fm.height);
  const int nx = x_end - x_start;
  const int ny = y_end - y_start;
  if (nx <= 0 || ny <= 0) return out;

  for (int by = 0; by < out_size; ++by) {
    const int y0 = y_start + (by * ny) / out_size;
    const int y1 = y_start + ((by + 1) * ny) / out_size;
    for (int bx = 0; bx < out_size; ++bx) {
      const int x0 = x_start + (bx * nx) / out_size;
      const int x1 = x_start + ((bx + 1) * nx) / out_size;
      if (y1 <= y0 || x1 <= x0) continue;  // empty bin stays 0
      for (int c = 0; c < fm.channels; ++c) {
        out.at(c, by, bx) =
            fm.channel(c).block(y0, x0, y1 - y0, x1 - x0).maxCoeff();
      }
    }
  }
  return out;
}

/// Non-overlapping 2x2 max-pool with stride 2 (14x14 -> 7x7 in the
/// stock pipeline). The grid size must be even.
template <typename T>
PooledFeature<T> max_pool_2x2(const PooledFeature<T>& p) {
  if (p.size % 2 != 0) {
    throw InvalidInputError("max_pool_2x2 requires an even grid size");
  }
  const int half = p.size / 2;
  PooledFeature<T> out(p.channels, half);
  for (int c = 0; c < p.channels; ++c) {
    for (int y = 0; y < half; ++y) {
      for (int x = 0; x < half; ++x) {
        out.at(c, y, x) = p.channel(c).block(2 * y, 2 * x, 2, 2).maxCoeff();
      }
    }
  }
  return out;
}

}  // namespace regionkit
