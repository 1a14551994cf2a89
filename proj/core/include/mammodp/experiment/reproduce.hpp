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

#ifndef MAMMODP_EXPERIMENT_REPRODUCE_HPP_
#define MAMMODP_EXPERIMENT_REPRODUCE_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/classify/train.hpp"
#include "mammodp/experiment/config.hpp"
#include "mammodp/experiment/run_store.hpp"
#include "mammodp/ingest/records.hpp"

namespace mammodp::experiment {

struct ExperimentData {
  std::vector<ingest::MassPatch> train;
  std::vector<ingest::MassPatch> val;
  std::vector<ingest::MassPatch> test;
  std::vector<ingest::MassPatch> external;  // empty when not configured
  std::vector<ingest::MassPatch> synthetic;
  std::vector<std::string> notes;
};

// Fixture split rule: every fifth patient (sorted ids, starting with the
// fifth) is held out for test; the rest are split per patient into
// train/val. Returns one split per patch.
std::vector<ingest::Split> SplitFixture(const std::vector<ingest::MassPatch>& patches, double val_fraction,
                                        std::uint64_t seed);

// Real splits from the configured source and, when any regime or report
// needs it, the synthetic set: an existing archive, samples from a given
// generator checkpoint, or a generator trained here on the real training
// split (persisted under <out>/synthetic/<hash> and reused on rerun).
ExperimentData PrepareData(const ExperimentConfig& config, bool need_synthetic);

// Test-set names used in reports.
inline constexpr const char* kInternalTest = "internal";
inline constexpr const char* kExternalTest = "external";

struct ReproduceOptions {
  // Called before each run is executed (not for reused runs). Throwing
  // makes the run fail and be quarantined.
  std::function<void(const PlannedRun&)> before_run;
  bool verbose = true;
};

struct ReproduceSummary {
  std::size_t planned_runs = 0;  // cells x seeds
  std::size_t unique_runs = 0;   // after merging privacy-exempt duplicates
  std::size_t executed = 0;
  std::size_t reused = 0;
  std::size_t failed = 0;
  std::vector<std::string> run_ids;
  nlohmann::json table;
  std::filesystem::path json_path;
  std::filesystem::path csv_path;
  std::filesystem::path markdown_path;
};

// Runs every (regime, budget, seed), skipping runs whose record already
// exists, then writes <out>/table.{json,csv,md} with mean +- std over seeds
// per cell and test set. Failed runs are quarantined and their cells null.
ReproduceSummary ReproduceTable(const ExperimentConfig& config, const ReproduceOptions& options = {});

// Unique identity of one run given the prepared data.
std::string RunId(const ExperimentConfig& config, const PlannedRun& run, const classify::RegimeData& data);

struct SynthesisSummary {
  nlohmann::json report;
  std::vector<std::string> notices;
  std::filesystem::path json_path;
  std::filesystem::path csv_path;
  std::filesystem::path markdown_path;
  std::filesystem::path grid_path;
};

// Rows Syn/Real, Real/Real, Syn/Syn, Real/Real_BCDR per metric with
// mean +- std over subsets, plus a control row comparing the real set with
// itself on identical subsets, and a grid image of synthetic samples
// (benign top row, malignant bottom row).
SynthesisSummary ReproduceSynthesisReport(const ExperimentConfig& config);

}  // namespace mammodp::experiment

#endif  // MAMMODP_EXPERIMENT_REPRODUCE_HPP_
