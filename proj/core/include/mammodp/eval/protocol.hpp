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

#ifndef MAMMODP_EVAL_PROTOCOL_HPP_
#define MAMMODP_EVAL_PROTOCOL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mammodp/common/image.hpp"
#include "mammodp/eval/metrics.hpp"

namespace mammodp::eval {

// An image with enough provenance for per-patient sampling. Synthetic images
// carry an empty patient id.
struct ProvenancedImage {
  GrayImage image;
  std::string image_id;
  std::string patient_id;
  int label = 0;
  bool synthetic = false;
};

struct SubsetProtocolConfig {
  int n_subsets = 3;
  // Images per subset on each side. Zero means "as many as available":
  // one per patient for real sets, every image for synthetic sets.
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::uint64_t seed = 0;
  // Draw side b with side a's random stream, so two identical inputs yield
  // identical subsets (the self-distance control).
  bool share_subsets = false;
};

struct SeedAggregate {
  double mean = 0.0;
  double std = 0.0;
};

// Arithmetic mean and population (n-divisor) standard deviation.
SeedAggregate AggregateSeeds(std::span<const double> values);

// Indices of one subset. Real images contribute at most one image per
// patient; synthetic images are drawn without replacement.
std::vector<std::size_t> SampleSubset(std::span<const ProvenancedImage> set, std::size_t size, std::uint64_t seed,
                                      std::uint64_t subset_index, std::uint64_t side);

// Computes the metric on n_subsets paired subsets and reports mean +- std.
// The protocol JSON records sizes, seed, and member image ids per subset.
MetricReport PairedSubsetProtocol(std::span<const ProvenancedImage> set_a, std::span<const ProvenancedImage> set_b,
                                  const SubsetProtocolConfig& config, const SetMetric& metric);

}  // namespace mammodp::eval

#endif  // MAMMODP_EVAL_PROTOCOL_HPP_
