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

#ifndef MAMMODP_INGEST_RECORDS_HPP_
#define MAMMODP_INGEST_RECORDS_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/image.hpp"

namespace mammodp::ingest {

enum class View { kCC, kMLO, kNA };
enum class Label { kBenign = 0, kMalignant = 1 };
enum class Source { kCbisDdsm, kBcdr, kFixture, kSynthetic };
enum class Split { kTrain, kVal, kTest };

std::string ToString(View v);
std::string ToString(Label l);
std::string ToString(Source s);
std::string ToString(Split s);
View ParseView(std::string_view s);
Label ParseLabel(std::string_view s);
Source ParseSource(std::string_view s);
Split ParseSplit(std::string_view s);

inline int LabelIndex(Label l) { return static_cast<int>(l); }

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Pixel-coordinate box; width = x_max - x_min.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min; }
  int height() const noexcept { return y_max - y_min; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct LesionRecord {
  std::string patient_id;
  std::string image_id;
  View view = View::kNA;
  std::vector<Point> contour;       // empty when only a box is known
  std::optional<BoundingBox> box;   // precomputed box, if given
  Label label = Label::kBenign;
  Source source = Source::kFixture;
  std::optional<Split> predefined_split;
};

// A square lesion crop with intensities in [0, 1].
struct MassPatch {
  GrayImage pixels;
  Label label = Label::kBenign;
  LesionRecord provenance;
  bool synthetic = false;

  int side() const noexcept { return pixels.width; }
};

class MalformedContourError : public Error {
 public:
  using Error::Error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

// Checks squareness, side >= min_side, and the [0, 1] intensity range.
void ValidatePatch(const MassPatch& patch, int min_side = 128);

}  // namespace mammodp::ingest

#endif  // MAMMODP_INGEST_RECORDS_HPP_
