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

#include "mammodp/common/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mammodp/common/errors.hpp"

namespace mammodp {
namespace {

struct Tap {
  int index;
  double weight;
};

std::vector<std::vector<Tap>> AxisWeights(int in, int out) {
  std::vector<std::vector<Tap>> taps(out);
  if (out < in) {
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      const double begin = i * scale, end = (i + 1) * scale;
      for (int j = static_cast<int>(std::floor(begin)); j < in && j < end; ++j) {
        const double overlap = std::min(end, j + 1.0) - std::max(begin, static_cast<double>(j));
        if (overlap > 0.0) taps[i].push_back({j, overlap / scale});
      }
    }
  } else {
    const double scale = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
      const double src = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const int i0 = static_cast<int>(std::floor(src));
      const int i1 = std::min(i0 + 1, in - 1);
      const double w1 = src - i0;
      taps[i].push_back({i0, 1.0 - w1});
      if (w1 > 0.0) taps[i].push_back({i1, w1});
    }
  }
  return taps;
}

}  // namespace

GrayImage Resample(const GrayImage& image, int out_width, int out_height) {
  if (image.empty()) throw ContractViolation("cannot resample an empty image");
  if (out_width <= 0 || out_height <= 0) throw ContractViolation("resample target must be positive");
  if (out_width == image.width && out_height == image.height) return image;
  const auto wx = AxisWeights(image.width, out_width);
  const auto wy = AxisWeights(image.height, out_height);
  GrayImage rows(out_width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : wx[x]) acc += t.weight * image.at(t.index, y);
      rows.at(x, y) = acc;
    }
  }
  // Rounding in the weights may step outside the input range by an ulp.
  const auto [lo, hi] = std::minmax_element(image.pixels.begin(), image.pixels.end());
  GrayImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const Tap& t : wy[y]) acc += t.weight * rows.at(x, t.index);
      out.at(x, y) = std::clamp(acc, *lo, *hi);
    }
  }
  return out;
}

GrayImage Crop(const GrayImage& image, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > image.width || y + h > image.height) {
    throw ContractViolation("crop rectangle outside the image");
  }
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r)
    std::copy_n(image.pixels.begin() + static_cast<std::size_t>(y + r) * image.width + x, w,
                out.pixels.begin() + static_cast<std::size_t>(r) * w);
  return out;
}

}  // namespace mammodp
