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

#ifndef MAMMODP_INGEST_GEOMETRY_HPP_
#define MAMMODP_INGEST_GEOMETRY_HPP_

#include <span>

#include "mammodp/common/image.hpp"
#include "mammodp/ingest/records.hpp"

namespace mammodp::ingest {

inline constexpr int kDefaultMarginPx = 60;
inline constexpr int kMinPatchSide = 128;
inline constexpr int kClassifierSide = 224;

// Tight axis-aligned hull. Needs >= 3 points and a nonzero extent on both
// axes; anything else is rejected as a corrupt annotation.
BoundingBox ComputeBoundingBox(std::span<const Point> contour);

// Clamps box corners into [0, width] x [0, height].
BoundingBox ClampToImage(const BoundingBox& box, int width, int height);

struct SquareWindow {
  int x0 = 0;
  int y0 = 0;
  int side = 0;
};

// side = max(w + 2m, h + 2m, min_side); origin centers the box (floor).
SquareWindow SquareWindowFor(const BoundingBox& box, int margin_px = kDefaultMarginPx, int min_side = kMinPatchSide);

// Crops the square window around the box. Pixels outside the image are 0.
GrayImage ExtractSquare(const GrayImage& image, const BoundingBox& box, int margin_px = kDefaultMarginPx,
                        int min_side = kMinPatchSide);

MassPatch ExtractSquarePatch(const GrayImage& image, const LesionRecord& record, int margin_px = kDefaultMarginPx,
                             int min_side = kMinPatchSide);

// Min-max scaling to [0, 1]; a constant image maps to all zeros.
GrayImage NormalizeIntensity(const GrayImage& image);

// Area-average resize to 224 x 224, replicated to 3 identical channels.
ChannelImage ResizeForClassifier(const GrayImage& patch);

// Box of a record: the precomputed one, else the contour hull.
BoundingBox RecordBox(const LesionRecord& record);

}  // namespace mammodp::ingest

#endif  // MAMMODP_INGEST_GEOMETRY_HPP_
