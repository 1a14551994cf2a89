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

#include "mammodp/common/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "mammodp/common/errors.hpp"

namespace mammodp {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenFile(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

GrayImage ReadPng(const std::filesystem::path& path) {
  FilePtr file = OpenFile(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("malformed PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> buffer(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img(width, height);
  const double maxv = out_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      const int gray_channels = channels >= 3 ? 3 : 1;
      for (int c = 0; c < gray_channels; ++c) {
        const std::size_t idx = static_cast<std::size_t>(x) * channels + c;
        if (out_depth == 16) {
          std::uint16_t v;
          std::memcpy(&v, rows[y] + 2 * idx, 2);
          acc += v;
        } else {
          acc += rows[y][idx];
        }
      }
      img.at(x, y) = acc / gray_channels / maxv;
    }
  }
  return img;
}

GrayImage ReadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  auto next_int = [&in, &path]() {
    int v = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
    }
    if (!(in >> v)) throw IoError("malformed PGM header " + path.string());
    return v;
  };
  if (magic != "P5" && magic != "P2") throw IoError("unsupported PGM variant " + path.string());
  const int width = next_int();
  const int height = next_int();
  const int maxval = next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw IoError("malformed PGM header " + path.string());
  }
  GrayImage img(width, height);
  if (magic == "P2") {
    for (double& p : img.pixels) p = static_cast<double>(next_int()) / maxval;
    return img;
  }
  in.get();
  const bool wide = maxval > 255;
  for (double& p : img.pixels) {
    int v = in.get();
    if (wide) v = (v << 8) | in.get();
    if (!in) throw IoError("truncated PGM " + path.string());
    p = static_cast<double>(v) / maxval;
  }
  return img;
}

void WritePng(const std::filesystem::path& path, const GrayImage& img, int depth) {
  if (img.empty()) throw ContractViolation("cannot write empty image");
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    FilePtr file = OpenFile(tmp, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw IoError("libpng init failed");
    }
    std::vector<unsigned char> buffer(static_cast<std::size_t>(img.width) * img.height * (depth / 8));
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw IoError("PNG write failed " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, img.width, img.height, depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const double maxv = depth == 16 ? 65535.0 : 255.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      const double v = std::clamp(img.pixels[i], 0.0, 1.0);
      const auto q = static_cast<unsigned>(std::lround(v * maxv));
      if (depth == 16) {
        buffer[2 * i] = static_cast<unsigned char>(q >> 8);  // PNG is big-endian
        buffer[2 * i + 1] = static_cast<unsigned char>(q & 0xFF);
      } else {
        buffer[i] = static_cast<unsigned char>(q);
      }
    }
    const std::size_t rowbytes = static_cast<std::size_t>(img.width) * (depth / 8);
    for (int y = 0; y < img.height; ++y) png_write_row(png, buffer.data() + y * rowbytes);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

GrayImage FlipHorizontal(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
  return out;
}

GrayImage FlipVertical(const GrayImage& img) {
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(x, img.height - 1 - y);
  return out;
}

GrayImage ReadImage(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return ReadPng(path);
  if (ext == ".pgm") return ReadPgm(path);
  throw IoError("unsupported image format " + path.string());
}

void WritePng16(const std::filesystem::path& path, const GrayImage& img) { WritePng(path, img, 16); }
void WritePng8(const std::filesystem::path& path, const GrayImage& img) { WritePng(path, img, 8); }

}  // namespace mammodp
