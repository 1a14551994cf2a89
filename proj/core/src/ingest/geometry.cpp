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

#include "mammodp/ingest/geometry.hpp"

#include <algorithm>

#include "mammodp/common/resample.hpp"

namespace mammodp::ingest {

BoundingBox ComputeBoundingBox(std::span<const Point> contour) {
  if (contour.size() < 3) throw MalformedContourError("contour needs at least 3 points");
  BoundingBox box{contour[0].x, contour[0].y, contour[0].x, contour[0].y};
  for (const Point& p : contour) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  if (box.width() == 0 || box.height() == 0) throw MalformedContourError("contour has zero area");
  return box;
}

BoundingBox ClampToImage(const BoundingBox& box, int width, int height) {
  return {std::clamp(box.x_min, 0, width), std::clamp(box.y_min, 0, height), std::clamp(box.x_max, 0, width),
          std::clamp(box.y_max, 0, height)};
}

SquareWindow SquareWindowFor(const BoundingBox& box, int margin_px, int min_side) {
  if (box.width() < 0 || box.height() < 0) throw ContractViolation("box corners are inverted");
  if (margin_px < 0 || min_side < 1) throw ContractViolation("margin must be >= 0 and min_side >= 1");
  const int side = std::max({box.width() + 2 * margin_px, box.height() + 2 * margin_px, min_side});
  auto floor_half = [](int v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); };
  return {box.x_min + floor_half(box.width() - side), box.y_min + floor_half(box.height() - side), side};
}

namespace {

void RequireIntersection(const GrayImage& image, const BoundingBox& box) {
  if (box.x_min >= image.width || box.y_min >= image.height || box.x_max < 0 || box.y_max < 0) {
    throw OutOfBoundsError("bounding box lies outside the image");
  }
}

}  // namespace

GrayImage ExtractSquare(const GrayImage& image, const BoundingBox& box, int margin_px, int min_side) {
  RequireIntersection(image, box);
  const SquareWindow win = SquareWindowFor(box, margin_px, min_side);
  GrayImage out(win.side, win.side, 0.0);
  const int x_lo = std::max(0, win.x0), x_hi = std::min(image.width, win.x0 + win.side);
  const int y_lo = std::max(0, win.y0), y_hi = std::min(image.height, win.y0 + win.side);
  for (int y = y_lo; y < y_hi; ++y) {
    for (int x = x_lo; x < x_hi; ++x) out.at(x - win.x0, y - win.y0) = image.at(x, y);
  }
  return out;
}

BoundingBox RecordBox(const LesionRecord& record) {
  if (record.box) {
    if (record.box->width() <= 0 || record.box->height() <= 0) throw MalformedContourError("box has zero area");
    return *record.box;
  }
  return ComputeBoundingBox(record.contour);
}

MassPatch ExtractSquarePatch(const GrayImage& image, const LesionRecord& record, int margin_px, int min_side) {
  MassPatch patch;
  patch.provenance = record;
  RequireIntersection(image, RecordBox(record));
  patch.provenance.box = ClampToImage(RecordBox(record), image.width, image.height);
  patch.pixels = ExtractSquare(image, *patch.provenance.box, margin_px, min_side);
  patch.label = record.label;
  patch.synthetic = record.source == Source::kSynthetic;
  return patch;
}

GrayImage NormalizeIntensity(const GrayImage& image) {
  if (image.empty()) throw EmptyInputError("cannot normalize an empty image");
  const auto [lo, hi] = std::minmax_element(image.pixels.begin(), image.pixels.end());
  GrayImage out(image.width, image.height, 0.0);
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = std::clamp((image.pixels[i] - *lo) / range, 0.0, 1.0);
  }
  return out;
}

ChannelImage ResizeForClassifier(const GrayImage& patch) {
  if (!patch.square()) throw ContractViolation("classifier input must be square");
  const GrayImage resized = Resample(patch, kClassifierSide, kClassifierSide);
  ChannelImage out{3, kClassifierSide, kClassifierSide, {}};
  out.data.reserve(3 * resized.pixels.size());
  for (int c = 0; c < 3; ++c) {
    for (double v : resized.pixels) out.data.push_back(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

}  // namespace mammodp::ingest
