// Copyright (C) 2026 RegionKit Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "regionkit/errors.hpp"

namespace regionkit {

/// Axis-aligned rectangle on the continuous image plane. Corners are
/// inclusive and area = (x2-x1)*(y2-y1); there is no legacy "+1" pixel
/// correction anywhere in this library. Zero-extent boxes are valid
/// values (they arise from clipping); negative extents and non-finite
/// coordinates are rejected at construction.
template <typename T>
struct Box {
  T x1{0}, y1{0}, x2{0}, y2{0};

  Box() = default;

  Box(T x1_, T y1_, T x2_, T y2_) : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
    if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
          std::isfinite(y2))) {
      throw InvalidInputError("box has non-finite coordinates");
    }
    if (x2 < x1 || y2 < y1) {
      throw InvalidInputError("box has negative extent");
    }
  }

  T width() const { return x2 - x1; }
  T height() const { return y2 - y1; }
  T area() const { return width() * height(); }
  T center_x() const { return (x1 + x2) / T(2); }
  T center_y() const { return (y1 + y2) / T(2); }

  template <typename U>
  Box<U> cast() const {
    return Box<U>(static_cast<U>(x1), static_cast<U>(y1), static_cast<U>(x2),
                  static_cast<U>(y2));
  }

  friend bool operator==(const Box& a, const Box& b) {
    return a.x1 == b.x1 && a.y1 == b.y1 && a.x2 == b.x2 && a.y2 == b.y2;
  }
};

using Boxf = Box<float>;
using Boxd = Box<double>;

/// Center-shift / log-size parameterization of one box relative to an
/// anchor. decode_delta(a, encode_delta(a, t)) == t.
template <typename T>
struct BoxDelta {
  T dx{0}, dy{0}, dw{0}, dh{0};
};

using BoxDeltaf = BoxDelta<float>;
using BoxDeltad = BoxDelta<double>;

template <typename T>
T intersection_area(const Box<T>& a, const Box<T>& b) {
  const T iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  if (iw <= T(0)) return T(0);
  const T ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ih <= T(0)) return T(0);
  return iw * ih;
}

/// Intersection over union in [0, 1]. Two boxes with zero union (both
/// zero-area) give 0.
template <typename T>
T iou(const Box<T>& a, const Box<T>& b) {
  const T inter = intersection_area(a, b);
  const T uni = a.area() + b.area() - inter;
  if (uni <= T(0)) return T(0);
  return inter / uni;
}

/// Regression target of `target` relative to `anchor` in center/size
/// form: dx = (tcx-acx)/aw, dy = (tcy-acy)/ah, dw = ln(tw/aw),
/// dh = ln(th/ah). The anchor must have strictly positive extents and
/// so must the target (ln of a zero extent is undefined).
template <typename T>
BoxDelta<T> encode_delta(const Box<T>& anchor, const Box<T>& target) {
  if (anchor.width() <= T(0) || anchor.height() <= T(0)) {
    throw DegenerateBoxError("encode_delta: anchor has zero extent");
  }
  if (target.width() <= T(0) || target.height() <= T(0)) {
    throw DegenerateBoxError("encode_delta: target has zero extent");
  }
  BoxDelta<T> d;
  d.dx = (target.center_x() - anchor.center_x()) / anchor.width();
  d.dy = (target.center_y() - anchor.center_y()) / anchor.height();
  d.dw = std::log(target.width() / anchor.width());
  d.dh = std::log(target.height() / anchor.height());
  return d;
}

/// Exact inverse of encode_delta. No clamping is applied to the decoded
/// size; a delta whose exp() leaves the representable range raises
/// NumericRangeError and callers clip to the image instead.
template <typename T>
Box<T> decode_delta(const Box<T>& anchor, const BoxDelta<T>& delta) {
  if (anchor.width() <= T(0) || anchor.height() <= T(0)) {
    throw DegenerateBoxError("decode_delta: anchor has zero extent");
  }
  const T cx = anchor.center_x() + delta.dx * anchor.width();
  const T cy = anchor.center_y() + delta.dy * anchor.height();
  const T w = anchor.width() * std::exp(delta.dw);
  const T h = anchor.height() * std::exp(delta.dh);
  const T x1 = cx - w / T(2);
  const T y1 = cy - h / T(2);
  const T x2 = cx + w / T(2);
  const T y2 = cy + h / T(2);
  if (!(std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
        std::isfinite(y2))) {
    throw NumericRangeError("decode_delta: decoded box overflows");
  }
  return Box<T>(x1, y1, x2, y2);
}

/// Clamps a box to [0, width] x [0, height]. Total on valid boxes and
/// idempotent; the result may have zero area.
template <typename T>
Box<T> clip_to_image(const Box<T>& b, T width, T height) {
  if (!(width > T(0)) || !(height > T(0))) {
    throw InvalidInputError("clip_to_image: non-positive image size");
  }
  const auto clampx = [width](T v) { return std::clamp(v, T(0), width); };
  const auto clampy = [height](T v) { return std::clamp(v, T(0), height); };
  return Box<T>(clampx(b.x1), clampy(b.y1), clampx(b.x2), clampy(b.y2));
}

/// True iff either extent is strictly below min_size.
template <typename T>
bool is_small(const Box<T>& b, T min_size) {
  if (!(min_size > T(0))) {
    throw InvalidInputError("is_small: min_size must be positive");
  }
  return b.width() < min_size || b.height() < min_size;
}

}  // namespace regionkit
