// Copyright 2026 The STA Toolkit Authors. All Rights Reserved.
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
#include <sstream>

#include "sta/errors.hpp"

namespace sta {

/// Axis-aligned box in continuous corner coordinates. Area is
/// (x2 - x1) * (y2 - y1); there is no +1 pixel convention.
template <typename Scalar>
struct Box2 {
  Scalar x1{0};
  Scalar y1{0};
  Scalar x2{0};
  Scalar y2{0};

  Scalar width() const { return x2 - x1; }
  Scalar height() const { return y2 - y1; }
  Scalar area() const { return width() * height(); }
  Scalar center_x() const { return (x1 + x2) / Scalar(2); }
  Scalar center_y() const { return (y1 + y2) / Scalar(2); }

  bool operator==(const Box2&) const = default;
};

using Box2D = Box2<double>;
using Box2F = Box2<float>;

template <typename Scalar>
bool is_valid(const Box2<Scalar>& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

template <typename Scalar>
std::string describe(const Box2<Scalar>& b) {
  std::ostringstream os;
  os << "(" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2 << ")";
  return os.str();
}

template <typename Scalar>
void validate_box(const Box2<Scalar>& b) {
  if (!is_valid(b)) throw ValidationError("invalid box " + describe(b));
}

/// Intersection over union. Boxes with zero area overlap nothing, so any pair
/// involving one yields 0.
template <typename Scalar>
Scalar iou(const Box2<Scalar>& a, const Box2<Scalar>& b) {
  validate_box(a);
  validate_box(b);
  const Scalar area_a = a.area();
  const Scalar area_b = b.area();
  if (area_a <= Scalar(0) || area_b <= Scalar(0)) return Scalar(0);
  const Scalar iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const Scalar ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= Scalar(0) || ih <= Scalar(0)) return Scalar(0);
  const Scalar inter = iw * ih;
  const Scalar uni = area_a + area_b - inter;
  if (uni <= Scalar(0)) return Scalar(0);
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

template <typename Scalar>
struct ClippedBox {
  Box2<Scalar> box;
  bool degenerate = false;  // zero area after clipping
};

/// Clamps every corner into [0, width] x [0, height].
template <typename Scalar>
ClippedBox<Scalar> clip_box(const Box2<Scalar>& b, Scalar width, Scalar height) {
  if (!(width > Scalar(0)) || !(height > Scalar(0)) || !std::isfinite(width) ||
      !std::isfinite(height)) {
    throw ValidationError("clip_box: image size must be positive and finite");
  }
  validate_box(b);
  ClippedBox<Scalar> out;
  out.box.x1 = std::clamp(b.x1, Scalar(0), width);
  out.box.y1 = std::clamp(b.y1, Scalar(0), height);
  out.box.x2 = std::clamp(b.x2, Scalar(0), width);
  out.box.y2 = std::clamp(b.y2, Scalar(0), height);
  out.degenerate = out.box.area() <= Scalar(0);
  return out;
}

}  // namespace sta
