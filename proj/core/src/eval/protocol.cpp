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

#include "mammodp/eval/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mammodp/common/rng.hpp"

namespace mammodp::eval {

SeedAggregate AggregateSeeds(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("cannot aggregate an empty value list");
  SeedAggregate agg;
  for (double v : values) agg.mean += v;
  agg.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.std = std::sqrt(ss / static_cast<double>(values.size()));
  return agg;
}

std::vector<std::size_t> SampleSubset(std::span<const ProvenancedImage> set, std::size_t size, std::uint64_t seed,
                                      std::uint64_t subset_index, std::uint64_t side) {
  if (set.empty()) throw EmptyInputError("cannot sample a subset from an empty image set");
  Rng rng = MakeRng(seed, {subset_index, side});
  std::vector<std::size_t> chosen;
  // Real patients in sorted order so arrival order never matters.
  std::map<std::string, std::vector<std::size_t>> by_patient;
  std::vector<std::size_t> synthetic;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].synthetic || set[i].patient_id.empty()) {
      synthetic.push_back(i);
    } else {
      by_patient[set[i].patient_id].push_back(i);
    }
  }
  if (!by_patient.empty() && !synthetic.empty()) {
    throw ContractViolation("subset sampling expects an all-real or all-synthetic set");
  }
  if (!by_patient.empty()) {
    std::vector<const std::vector<std::size_t>*> patients;
    for (const auto& [id, rows] : by_patient) patients.push_back(&rows);
    const std::size_t want = size == 0 ? patients.size() : size;
    if (want > patients.size()) {
      throw InsufficientSamplesError("requested " + std::to_string(want) + " images but only " +
                                     std::to_string(patients.size()) + " patients are available");
    }
    std::shuffle(patients.begin(), patients.end(), rng);
    for (std::size_t p = 0; p < want; ++p) {
      const auto& rows = *patients[p];
      std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
      chosen.push_back(rows[pick(rng)]);
    }
  } else {
    const std::size_t want = size == 0 ? synthetic.size() : size;
    if (want > synthetic.size()) {
      throw InsufficientSamplesError("requested " + std::to_string(want) + " images but only " +
                                     std::to_string(synthetic.size()) + " are available");
    }
    std::shuffle(synthetic.begin(), synthetic.end(), rng);
    chosen.assign(synthetic.begin(), synthetic.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

MetricReport PairedSubsetProtocol(std::span<const ProvenancedImage> set_a, std::span<const ProvenancedImage> set_b,
                                  const SubsetProtocolConfig& config, const SetMetric& metric) {
  if (config.n_subsets < 1) throw ContractViolation("n_subsets must be at least 1");
  auto featurize = [&](std::span<const ProvenancedImage> set) {
    std::vector<GrayImage> images;
    images.reserve(set.size());
    for (const auto& p : set) images.push_back(p.image);
    return metric.featurize(images);
  };
  const FeatureMatrix features_a = featurize(set_a);
  const FeatureMatrix features_b = featurize(set_b);

  MetricReport report;
  report.metric = metric.name;
  nlohmann::json subsets = nlohmann::json::array();
  for (int s = 0; s < config.n_subsets; ++s) {
    const auto rows_a = SampleSubset(set_a, config.size_a, config.seed, static_cast<std::uint64_t>(s), 0);
    const auto rows_b =
        SampleSubset(set_b, config.size_b, config.seed, static_cast<std::uint64_t>(s), config.share_subsets ? 0 : 1);
    std::vector<std::string> warnings;
    const double value = metric.distance(SelectRows(features_a, rows_a), SelectRows(features_b, rows_b), warnings);
    for (auto& w : warnings) {
      if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end()) {
        report.warnings.push_back(std::move(w));
      }
    }
    report.per_subset.push_back(value);
    nlohmann::json ids_a = nlohmann::json::array(), ids_b = nlohmann::json::array();
    for (auto r : rows_a) ids_a.push_back(set_a[r].image_id);
    for (auto r : rows_b) ids_b.push_back(set_b[r].image_id);
    subsets.push_back({{"index", s}, {"value", value}, {"members_a", ids_a}, {"members_b", ids_b}});
  }
  const SeedAggregate agg = AggregateSeeds(report.per_subset);
  report.value = agg.mean;
  report.spread = agg.std;
  report.protocol = {{"n_subsets", config.n_subsets},
                     {"size_a", config.size_a},
                     {"size_b", config.size_b},
                     {"seed", config.seed},
                     {"share_subsets", config.share_subsets},
                     {"extractor", metric.extractor},
                     {"std_estimator", "population"},
                     {"subsets", subsets}};
  if (metric.name == "frd") report.protocol["normalization"] = "z-score fit on set a";
  return report;
}

}  // namespace mammodp::eval
