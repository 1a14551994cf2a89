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

#include "mammodp/eval/radiomics.hpp"

#include <algorithm>
#include <cmath>

#include "mammodp/common/errors.hpp"

namespace mammodp::eval {
namespace {

int Quantize(double v) {
  const int level = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * kGrayLevels));
  return std::min(level, kGrayLevels - 1);
}

// numpy-style linear interpolation between order statistics.
double Percentile(const std::vector<double>& sorted, double pct) {
  const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

GlcmFeatures ComputeGlcm(const GrayImage& image, int dx, int dy) {
  std::vector<double> counts(kGrayLevels * kGrayLevels, 0.0);
  double total = 0.0;
  for (int y = 0; y < image.height; ++y) {
    const int ny = y + dy;
    if (ny < 0 || ny >= image.height) continue;
    for (int x = 0; x < image.width; ++x) {
      const int nx = x + dx;
      if (nx < 0 || nx >= image.width) continue;
      const int i = Quantize(image.at(x, y));
      const int j = Quantize(image.at(nx, ny));
      counts[i * kGrayLevels + j] += 1.0;
      counts[j * kGrayLevels + i] += 1.0;
      total += 2.0;
    }
  }
  GlcmFeatures f;
  if (total == 0.0) return f;
  double mu = 0.0;
  for (int i = 0; i < kGrayLevels; ++i)
    for (int j = 0; j < kGrayLevels; ++j) mu += i * counts[i * kGrayLevels + j] / total;
  double var = 0.0;
  f.homogeneity = 0.0;
  f.energy = 0.0;
  double cov = 0.0;
  for (int i = 0; i < kGrayLevels; ++i) {
    for (int j = 0; j < kGrayLevels; ++j) {
      const double p = counts[i * kGrayLevels + j] / total;
      if (p == 0.0) continue;
      const double diff = static_cast<double>(i - j);
      f.contrast += diff * diff * p;
      f.homogeneity += p / (1.0 + diff * diff);
      f.energy += p * p;
      var += (i - mu) * (i - mu) * p;
      cov += (i - mu) * (j - mu) * p;
    }
  }
  // Symmetric GLCM: both marginals share mean and variance.
  f.correlation = var > 0.0 ? cov / var : 0.0;
  return f;
}

std::vector<double> RadiomicsFeatures(const GrayImage& image) {
  if (image.empty()) throw ContractViolation("radiomics of an empty image");
  const double n = static_cast<double>(image.pixels.size());
  double mean = 0.0;
  for (double v : image.pixels) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : image.pixels) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  std::vector<double> hist(kGrayLevels, 0.0);
  for (double v : image.pixels) hist[Quantize(v)] += 1.0;
  double entropy = 0.0, uniformity = 0.0;
  for (double c : hist) {
    if (c == 0.0) continue;
    const double p = c / n;
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }
  std::vector<double> sorted = image.pixels;
  std::sort(sorted.begin(), sorted.end());

  GlcmFeatures mean_glcm{0.0, 0.0, 0.0, 0.0};
  constexpr int kOffsets[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  for (const auto& off : kOffsets) {
    const GlcmFeatures g = ComputeGlcm(image, off[0], off[1]);
    mean_glcm.contrast += g.contrast / 4.0;
    mean_glcm.correlation += g.correlation / 4.0;
    mean_glcm.homogeneity += g.homogeneity / 4.0;
    mean_glcm.energy += g.energy / 4.0;
  }
  return {mean,
          m2,
          skewness,
          kurtosis,
          entropy,
          uniformity,
          Percentile(sorted, 10.0),
          Percentile(sorted, 50.0),
          Percentile(sorted, 90.0),
          mean_glcm.contrast,
          mean_glcm.correlation,
          mean_glcm.homogeneity,
          mean_glcm.energy};
}

const std::vector<std::string>& RadiomicsFeatureNames() {
  static const std::vector<std::string> names = {
      "firstorder_mean",     "firstorder_variance",  "firstorder_skewness", "firstorder_kurtosis",
      "firstorder_entropy",  "firstorder_energy",    "firstorder_p10",      "firstorder_p50",
      "firstorder_p90",      "glcm_contrast",        "glcm_correlation",    "glcm_homogeneity",
      "glcm_energy"};
  return names;
}

}  // namespace mammodp::eval
