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

#include "mammodp/eval/metrics.hpp"

#include <cmath>
#include <memory>

#include "mammodp/eval/extractors.hpp"
#include "mammodp/eval/radiomics.hpp"

namespace mammodp::eval {
namespace {

void RequireSets(std::size_t a, std::size_t b) {
  if (a < 2 || b < 2) throw InsufficientSamplesError("Fréchet metrics need at least two images per set");
}

std::string FeatureName(std::size_t index) {
  const auto& names = RadiomicsFeatureNames();
  return index < names.size() ? names[index] : "feature_" + std::to_string(index);
}

}  // namespace

nlohmann::json MetricReport::ToJson() const {
  return {{"metric", metric}, {"mean", value},       {"std", spread},
          {"per_subset", per_subset}, {"protocol", protocol}, {"warnings", warnings}};
}

FeatureMatrix SelectRows(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  FeatureMatrix out(rows.size(), m.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows) throw ContractViolation("row index out of range");
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return out;
}

FrdResult FrdFromFeatures(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.cols != b.cols) throw ContractViolation("feature matrices differ in width");
  RequireSets(a.rows, b.rows);
  FrdResult result;
  std::vector<std::size_t> kept;
  std::vector<double> mean(a.cols, 0.0), scale(a.cols, 0.0);
  for (std::size_t c = 0; c < a.cols; ++c) {
    for (std::size_t r = 0; r < a.rows; ++r) mean[c] += a.at(r, c);
    mean[c] /= static_cast<double>(a.rows);
    double ss = 0.0;
    for (std::size_t r = 0; r < a.rows; ++r) ss += (a.at(r, c) - mean[c]) * (a.at(r, c) - mean[c]);
    scale[c] = std::sqrt(ss / static_cast<double>(a.rows - 1));
    if (scale[c] > 0.0 && std::isfinite(scale[c])) {
      kept.push_back(c);
    } else {
      result.dropped.push_back(c);
    }
  }
  if (kept.empty()) throw InsufficientSamplesError("every radiomics feature is constant in the first set");
  auto normalize = [&](const FeatureMatrix& m) {
    FeatureMatrix z(m.rows, kept.size());
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t k = 0; k < kept.size(); ++k) z.at(r, k) = (m.at(r, kept[k]) - mean[kept[k]]) / scale[kept[k]];
    }
    return z;
  };
  result.distance = FrechetDistance(FitGaussian(normalize(a)), FitGaussian(normalize(b)));
  return result;
}

SetMetric MakeSetMetric(const std::string& metric, const std::string& extractor) {
  if (metric == "fid") {
    std::shared_ptr<FeatureExtractor> backend = MakeExtractor(extractor);
    return SetMetric{
        "fid", backend->name(),
        [backend](std::span<const GrayImage> images) { return backend->Extract(images); },
        [](const FeatureMatrix& a, const FeatureMatrix& b, std::vector<std::string>&) {
          RequireSets(a.rows, b.rows);
          return FrechetDistance(FitGaussian(a), FitGaussian(b));
        }};
  }
  if (metric == "frd") {
    return SetMetric{
        "frd", kRadiomicsVersion,
        [](std::span<const GrayImage> images) {
          FeatureMatrix m(images.size(), RadiomicsFeatureNames().size());
          for (std::size_t r = 0; r < images.size(); ++r) {
            const auto f = RadiomicsFeatures(images[r]);
            std::copy(f.begin(), f.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
          }
          return m;
        },
        [](const FeatureMatrix& a, const FeatureMatrix& b, std::vector<std::string>& warnings) {
          const FrdResult r = FrdFromFeatures(a, b);
          for (std::size_t c : r.dropped) {
            warnings.push_back("dropped zero-variance radiomics feature '" + FeatureName(c) + "'");
          }
          return r.distance;
        }};
  }
  throw ConfigError({"unknown metric '" + metric + "' (expected fid or frd)"});
}

namespace {

MetricReport RunOnce(const SetMetric& metric, std::span<const GrayImage> a, std::span<const GrayImage> b) {
  RequireSets(a.size(), b.size());
  MetricReport report;
  report.metric = metric.name;
  report.value = metric.distance(metric.featurize(a), metric.featurize(b), report.warnings);
  report.per_subset = {report.value};
  report.protocol = {{"extractor", metric.extractor}, {"n_a", a.size()}, {"n_b", b.size()}};
  if (metric.name == "frd") report.protocol["normalization"] = "z-score fit on set a";
  return report;
}

}  // namespace

MetricReport Fid(std::span<const GrayImage> a, std::span<const GrayImage> b, const std::string& extractor) {
  return RunOnce(MakeSetMetric("fid", extractor), a, b);
}

MetricReport Frd(std::span<const GrayImage> a, std::span<const GrayImage> b) {
  return RunOnce(MakeSetMetric("frd", ""), a, b);
}

}  // namespace mammodp::eval
