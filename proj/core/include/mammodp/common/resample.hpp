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

#ifndef MAMMODP_COMMON_RESAMPLE_HPP_
#define MAMMODP_COMMON_RESAMPLE_HPP_

#include "mammodp/common/image.hpp"

namespace mammodp {

// Separable resampling. Along an axis that shrinks, every output pixel is
// the exact area average of the input span it covers (box filter with
// fractional edge weights); along an axis that grows or stays, bilinear
// interpolation on pixel centers. Rows of the weight matrices sum to one,
// so constants are reproduced exactly and the value range never widens.
GrayImage Resample(const GrayImage& image, int out_width, int out_height);

// Sub-rectangle [x, x + w) x [y, y + h); the rectangle must lie inside.
GrayImage Crop(const GrayImage& image, int x, int y, int w, int h);

}  // namespace mammodp

#endif  // MAMMODP_COMMON_RESAMPLE_HPP_
