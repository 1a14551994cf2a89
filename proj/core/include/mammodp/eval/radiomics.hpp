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

#ifndef MAMMODP_EVAL_RADIOMICS_HPP_
#define MAMMODP_EVAL_RADIOMICS_HPP_

#include <array>
#include <string>
#include <vector>

#include "mammodp/common/image.hpp"

namespace mammodp::eval {

inline constexpr int kGrayLevels = 64;
inline constexpr const char* kRadiomicsVersion = "desk-radiomics-v1";

struct GlcmFeatures {
  double contrast = 0.0;
  double correlation = 0.0;
  double homogeneity = 1.0;
  double energy = 1.0;
};

// Symmetric, normalized co-occurrence statistics at one pixel offset over
// intensities quantized to 64 levels. A flat GLCM has correlation 0.
GlcmFeatures ComputeGlcm(const GrayImage& image, int dx, int dy);

// Feature order matches RadiomicsFeatureNames():
//   mean, variance, skewness, kurtosis, entropy, energy, p10, p50, p90,
//   glcm contrast, correlation, homogeneity, energy (mean over the four
//   unit offsets).
std::vector<double> RadiomicsFeatures(const GrayImage& image);
const std::vector<std::string>& RadiomicsFeatureNames();

}  // namespace mammodp::eval

#endif  // MAMMODP_EVAL_RADIOMICS_HPP_
