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

#ifndef MAMMODP_COMMON_IMAGE_HPP_
#define MAMMODP_COMMON_IMAGE_HPP_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace mammodp {

// Single-channel image, row-major, intensity nominally in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const noexcept { return pixels.empty(); }
  bool square() const noexcept { return width == height; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Channel-major (CHW) image as consumed by the classifier.
struct ChannelImage {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int c, int x, int y) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

GrayImage FlipHorizontal(const GrayImage& img);
GrayImage FlipVertical(const GrayImage& img);

// Reads 8/16-bit grayscale (or RGB, averaged) PNG and binary/ASCII PGM.
// Raw values are divided by the format maximum, so the result is in [0, 1].
GrayImage ReadImage(const std::filesystem::path& path);

// Lossless 16-bit grayscale PNG; values are clamped to [0, 1].
void WritePng16(const std::filesystem::path& path, const GrayImage& img);
void WritePng8(const std::filesystem::path& path, const GrayImage& img);

}  // namespace mammodp

#endif  // MAMMODP_COMMON_IMAGE_HPP_
