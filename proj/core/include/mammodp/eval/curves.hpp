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

#ifndef MAMMODP_EVAL_CURVES_HPP_
#define MAMMODP_EVAL_CURVES_HPP_

#include <span>

#include "mammodp/common/errors.hpp"

namespace mammodp::eval {

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Probability that a random positive outranks a random negative, ties
// counting one half. labels: 1 = positive (malignant), 0 = negative.
double Auroc(std::span<const double> scores, std::span<const int> labels);

// Step-wise average precision: sum over distinct thresholds (descending) of
// (recall_k - recall_{k-1}) * precision_k, no interpolation.
double Auprc(std::span<const double> scores, std::span<const int> labels);

}  // namespace mammodp::eval

#endif  // MAMMODP_EVAL_CURVES_HPP_
