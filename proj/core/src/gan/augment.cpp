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

#include "mammodp/gan/augment.hpp"

#include <algorithm>
#include <cmath>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/resample.hpp"

namespace mammodp::gan {

AugmentParams DrawAugmentParams(int width, int height, const AugmentConfig& config, Rng& rng) {
  if (width < 1 || height < 1) throw ContractViolation("cannot augment an empty image");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentParams p;
  p.flip_horizontal = unit(rng) < config.flip_p;
  p.flip_vertical = unit(rng) < config.flip_p;

  const double area = static_cast<double>(width) * height;
  const double log_lo = std::log(config.ratio_low), log_hi = std::log(config.ratio_high);
  std::uniform_real_distribution<double> scale(config.scale_low, config.scale_high);
  std::uniform_real_distribution<double> log_ratio(log_lo, log_hi);
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const double target = area * scale(rng);
    const double aspect = std::exp(log_ratio(rng));
    const int w = static_cast<int>(std::lround(std::sqrt(target * aspect)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / aspect)));
    if (w > 0 && h > 0 && w <= width && h <= height) {
      p.crop_w = w;
      p.crop_h = h;
      p.crop_x = std::uniform_int_distribution<int>(0, width - w)(rng);
      p.crop_y = std::uniform_int_distribution<int>(0, height - h)(rng);
      return p;
    }
  }
  const double in_ratio = static_cast<double>(width) / height;
  if (in_ratio < config.ratio_low) {
    p.crop_w = width;
    p.crop_h = static_cast<int>(std::lround(width / config.ratio_low));
  } else if (in_ratio > config.ratio_high) {
    p.crop_h = height;
    p.crop_w = static_cast<int>(std::lround(height * config.ratio_high));
  } else {
    p.crop_w = width;
    p.crop_h = height;
  }
  p.crop_x = (width - p.crop_w) / 2;
  p.crop_y = (height - p.crop_h) / 2;
  return p;
}

GrayImage ApplyAugment(const GrayImage& image, const AugmentParams& params, int output_side) {
  GrayImage out = image;
  if (params.flip_horizontal) out = FlipHorizontal(out);
  if (params.flip_vertical) out = FlipVertical(out);
  out = Crop(out, params.crop_x, params.crop_y, params.crop_w, params.crop_h);
  return Resample(out, output_side, output_side);
}

GrayImage Augment(const GrayImage& image, const AugmentConfig& config, Rng& rng) {
  if (!image.square()) throw ContractViolation("augment expects a square patch");
  return ApplyAugment(image, DrawAugmentParams(image.width, image.height, config, rng), config.output_side);
}

}  // namespace mammodp::gan
