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

#ifndef MAMMODP_TESTS_ORACLES_GEOMETRY_PROPERTY_HPP_
#define MAMMODP_TESTS_ORACLES_GEOMETRY_PROPERTY_HPP_

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mammodp/ingest/geometry.hpp"
#include "mammodp/ingest/records.hpp"
#include "oracles/window_oracle.hpp"

namespace mammodp::oracle {

// One randomized contour/margin case; returns an empty string when every
// contract holds, else a description of the first violation.
inline std::string CheckGeometryCase(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(40, 400), npts(3, 40), margin_d(0, 120);
  const int width = dim(rng), height = dim(rng), margin = margin_d(rng);
  GrayImage image(width, height);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& p : image.pixels) p = u(rng);

  std::uniform_int_distribution<int> px(0, width - 1), py(0, height - 1);
  std::vector<ingest::Point> contour;
  const int n = npts(rng);
  // Cluster the points so boxes range from tiny to image-filling.
  const int cx = px(rng), cy = py(rng);
  std::uniform_int_distribution<int> spread(1, std::max(width, height));
  const int s = spread(rng);
  std::uniform_int_distribution<int> off(-s, s);
  for (int i = 0; i < n; ++i) {
    contour.push_back({std::clamp(cx + off(rng), 0, width - 1), std::clamp(cy + off(rng), 0, height - 1)});
  }
  long x_min = contour[0].x, x_max = contour[0].x, y_min = contour[0].y, y_max = contour[0].y;
  for (const auto& p : contour) {
    x_min = std::min<long>(x_min, p.x);
    x_max = std::max<long>(x_max, p.x);
    y_min = std::min<long>(y_min, p.y);
    y_max = std::max<long>(y_max, p.y);
  }
  std::ostringstream why;
  if (x_min == x_max || y_min == y_max) {
    try {
      ingest::ComputeBoundingBox(contour);
      return "degenerate contour accepted";
    } catch (const ingest::MalformedContourError&) {
      return "";
    }
  }
  const ingest::BoundingBox box = ingest::ComputeBoundingBox(contour);
  if (box.x_min != x_min || box.x_max != x_max || box.y_min != y_min || box.y_max != y_max) {
    return "bounding box differs from the coordinate scan";
  }
  const Window w = SquareWindow(x_min, y_min, x_max, y_max, margin, ingest::kMinPatchSide);
  const GrayImage patch = ingest::ExtractSquare(image, box, margin);
  if (!patch.square()) return "patch is not square";
  if (patch.width != w.side) {
    why << "side " << patch.width << " != oracle " << w.side;
    return why.str();
  }
  if (patch.width < ingest::kMinPatchSide) return "side below the minimum";
  if (std::labs(2 * w.x0 + w.side - (x_min + x_max)) > 1 || std::labs(2 * w.y0 + w.side - (y_min + y_max)) > 1) {
    return "window not centered on the box";
  }
  const auto image_at = [&](long x, long y) { return image.at(static_cast<int>(x), static_cast<int>(y)); };
  for (long j = 0; j < w.side; ++j) {
    for (long i = 0; i < w.side; ++i) {
      const double want = PatchPixel(w, i, j, width, height, image_at);
      if (patch.at(static_cast<int>(i), static_cast<int>(j)) != want) {
        why << "pixel (" << i << "," << j << ") differs from the index oracle";
        return why.str();
      }
    }
  }
  ingest::LesionRecord record;
  record.patient_id = "P";
  record.image_id = "I";
  record.contour = contour;
  const auto mass = ingest::ExtractSquarePatch(ingest::NormalizeIntensity(image), record, margin);
  try {
    ingest::ValidatePatch(mass);
  } catch (const std::exception& e) {
    return std::string("patch contract: ") + e.what();
  }
  return "";
}

}  // namespace mammodp::oracle

#endif  // MAMMODP_TESTS_ORACLES_GEOMETRY_PROPERTY_HPP_
