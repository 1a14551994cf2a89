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

#ifndef MAMMODP_EVAL_METRICS_HPP_
#define MAMMODP_EVAL_METRICS_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/common/image.hpp"
#include "mammodp/eval/frechet.hpp"

namespace mammodp::eval {

struct MetricReport {
  std::string metric;
  double value = 0.0;   // mean over repeats
  double spread = 0.0;  // population std over repeats
  std::vector<double> per_subset;
  nlohmann::json protocol = nlohmann::json::object();
  std::vector<std::string> warnings;

  nlohmann::json ToJson() const;
};

// A Fréchet-family metric split into a per-image featurization and a
// set-level distance, so features can be computed once and subsetted.
struct SetMetric {
  std::string name;
  std::string extractor;
  std::function<FeatureMatrix(std::span<const GrayImage>)> featurize;
  std::function<double(const FeatureMatrix&, const FeatureMatrix&, std::vector<std::string>&)> distance;
};

FeatureMatrix SelectRows(const FeatureMatrix& m, std::span<const std::size_t> rows);

// Result of the radiomics distance, with the features that were dropped for
// having zero variance in the first set.
struct FrdResult {
  double distance = 0.0;
  std::vector<std::size_t> dropped;
};

// Both matrices are z-scored with the column mean and unbiased std of `a`.
FrdResult FrdFromFeatures(const FeatureMatrix& a, const FeatureMatrix& b);

MetricReport Fid(std::span<const GrayImage> a, std::span<const GrayImage> b, const std::string& extractor);
MetricReport Frd(std::span<const GrayImage> a, std::span<const GrayImage> b);

// "fid" (requires an extractor name) or "frd".
SetMetric MakeSetMetric(const std::string& metric, const std::string& extractor);

}  // namespace mammodp::eval

#endif  // MAMMODP_EVAL_METRICS_HPP_
