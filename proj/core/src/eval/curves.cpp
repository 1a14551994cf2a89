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

#include "mammodp/eval/curves.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mammodp::eval {
namespace {

struct ClassCounts {
  double positives = 0;
  double negatives = 0;
};

ClassCounts Validate(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractViolation("scores and labels differ in length");
  ClassCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ContractViolation("labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw ContractViolation("scores must be finite");
    (labels[i] == 1 ? c.positives : c.negatives) += 1;
  }
  if (c.positives == 0 || c.negatives == 0) throw UndefinedMetricError("curve metric needs both classes present");
  return c;
}

std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = Validate(scores, labels);
  const auto order = DescendingOrder(scores);
  // Walk from the top score down; twice the pair count keeps ties integral.
  double twice_pairs = 0.0;
  double negatives_above = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1.0;
      ++j;
    }
    const double negatives_below = c.negatives - negatives_above - neg;
    twice_pairs += pos * (2.0 * negatives_below + neg);
    negatives_above += neg;
    i = j;
  }
  return twice_pairs / (2.0 * c.positives * c.negatives);
}

double Auprc(std::span<const double> scores, std::span<const int> labels) {
  const ClassCounts c = Validate(scores, labels);
  const auto order = DescendingOrder(scores);
  double tp = 0.0, fp = 0.0, previous_recall = 0.0, area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / c.positives;
    const double precision = tp / (tp + fp);
    area += (recall - previous_recall) * precision;
    previous_recall = recall;
    i = j;
  }
  return area;
}

}  // namespace mammodp::eval
