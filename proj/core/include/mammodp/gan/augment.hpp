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

#ifndef MAMMODP_GAN_AUGMENT_HPP_
#define MAMMODP_GAN_AUGMENT_HPP_

#include "mammodp/common/image.hpp"
#include "mammodp/common/rng.hpp"

namespace mammodp::gan {

struct AugmentConfig {
  double flip_p = 0.5;  // per axis
  double scale_low = 0.9;
  double scale_high = 1.1;
  double ratio_low = 0.95;
  double ratio_high = 1.1;
  int output_side = 128;
  int max_attempts = 10;
};

struct AugmentParams {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  int crop_x = 0;
  int crop_y = 0;
  int crop_w = 0;
  int crop_h = 0;
};

// Random resized crop: up to max_attempts draws of (area scale, log-uniform
// aspect ratio); a draw that does not fit inside the image is retried, and
// the fallback is the largest centered crop with a clamped ratio.
AugmentParams DrawAugmentParams(int width, int height, const AugmentConfig& config, Rng& rng);
GrayImage ApplyAugment(const GrayImage& image, const AugmentParams& params, int output_side);

// Flips, then random resized crop, resampled to output_side x output_side.
GrayImage Augment(const GrayImage& image, const AugmentConfig& config, Rng& rng);

}  // namespace mammodp::gan

#endif  // MAMMODP_GAN_AUGMENT_HPP_
