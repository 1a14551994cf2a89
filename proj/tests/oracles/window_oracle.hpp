// Copyright 2026 The mammodp Authors
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

#ifndef MAMMODP_TESTS_ORACLES_WINDOW_ORACLE_HPP_
#define MAMMODP_TESTS_ORACLES_WINDOW_ORACLE_HPP_

#include <algorithm>
#include <cmath>

namespace mammodp::oracle {

struct Window {
  long x0 = 0;
  long y0 = 0;
  long side = 0;
};

// Square crop around a box, grown by the margin and floored at min_side,
// origin placed so that the window center sits on the box center (rounded
// toward -infinity when the slack is odd).
inline Window SquareWindow(long x_min, long y_min, long x_max, long y_max, long margin, long min_side) {
  const long side = std::max({x_max - x_min + 2 * margin, y_max - y_min + 2 * margin, min_side});
  const auto x0 = static_cast<long>(std::floor((static_cast<double>(x_min + x_max) - side) / 2.0));
  const auto y0 = static_cast<long>(std::floor((static_cast<double>(y_min + y_max) - side) / 2.0));
  return {x0, y0, side};
}

// Patch pixel (i, j) reads image pixel (x0 + i, y0 + j), or 0 outside.
template <typename ImageAt>
double PatchPixel(const Window& w, long i, long j, long width, long height, ImageAt image_at) {
  const long x = w.x0 + i, y = w.y0 + j;
  if (x < 0 || y < 0 || x >= width || y >= height) return 0.0;
  return image_at(x, y);
}

}  // namespace mammodp::oracle

#endif  // MAMMODP_TESTS_ORACLES_WINDOW_ORACLE_HPP_
