// Copyright 2026 The tiledet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TILEDET_GEOMETRY_HPP
#define TILEDET_GEOMETRY_HPP

#include <algorithm>
#include <optional>

#include "tiledet/errors.hpp"

namespace tiledet {

// Axis-aligned box, top-left anchored (x, y, w, h), continuous pixel
// coordinates. This is the COCO interchange format; corner form exists only
// through the x2()/y2() accessors and never crosses a file boundary.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  BBox() = default;
  BBox(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {
    if (!(w > 0) || !(h > 0)) {
      throw DataError("degenerate bbox: w and h must be > 0");
    }
    if (x < 0 || y < 0) {
      throw DataError("bbox origin must be non-negative");
    }
  }

  double x2() const { return x + w; }
  double y2() const { return y + h; }
  double area() const { return w * h; }

  bool operator==(const BBox&) const = default;
};

inline double intersection_area(const BBox& a, const BBox& b) {
  double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
  double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih;
}

inline double iou(const BBox& a, const BBox& b) {
  double inter = intersection_area(a, b);
  double uni = a.area() + b.area() - inter;
  return inter / uni;
}

// Smallest axis-aligned box containing both inputs.
inline BBox union_box(const BBox& a, const BBox& b) {
  double x1 = std::min(a.x, b.x);
  double y1 = std::min(a.y, b.y);
  double x2 = std::max(a.x2(), b.x2());
  double y2 = std::max(a.y2(), b.y2());
  return BBox(x1, y1, x2 - x1, y2 - y1);
}

// Intersection of box and window, still in the box's coordinate frame.
// Empty overlap yields nullopt.
inline std::optional<BBox> clip_box(const BBox& b, const BBox& window) {
  double x1 = std::max(b.x, window.x);
  double y1 = std::max(b.y, window.y);
  double x2 = std::min(b.x2(), window.x2());
  double y2 = std::min(b.y2(), window.y2());
  if (x2 <= x1 || y2 <= y1) return std::nullopt;
  return BBox(x1, y1, x2 - x1, y2 - y1);
}

}  // namespace tiledet

#endif  // TILEDET_GEOMETRY_HPP
