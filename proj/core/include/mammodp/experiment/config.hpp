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

#ifndef MAMMODP_EXPERIMENT_CONFIG_HPP_
#define MAMMODP_EXPERIMENT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/classify/backbone.hpp"
#include "mammodp/classify/regime.hpp"
#include "mammodp/classify/train.hpp"
#include "mammodp/gan/train.hpp"
#include "mammodp/privacy/budget.hpp"

namespace mammodp::experiment {

enum class DataSource { kFixture, kManifest, kRaw };

struct IngestSection {
  DataSource source = DataSource::kFixture;
  std::filesystem::path manifest;           // kManifest: patch archive manifest
  std::filesystem::path images;             // kRaw
  std::filesystem::path annotations;        // kRaw
  std::filesystem::path external_manifest;  // optional out-of-domain set
  double val_fraction = 0.2;
  int margin_px = 60;
  int fixture_patients = 16;
  int fixture_external_patients = 8;
  std::uint64_t fixture_seed = 7;
};

struct GanSection {
  bool synthesize = true;
  std::filesystem::path syn_manifest;  // use an existing synthetic archive
  std::filesystem::path checkpoint;    // sample from a trained generator
  gan::GanTrainConfig train;
  int n_benign = 16;
  int n_malignant = 16;
};

struct PrivacySection {
  // Empty optional is the infinite (non-private) budget.
  std::vector<std::optional<double>> epsilons = {6.0, std::nullopt};
  double delta = 1e-4;
  double clip_norm = 1.0;
  int group_k = 1;
};

struct ClassifySection {
  std::vector<classify::RegimeKind> regimes = classify::AllRegimes();
  int n_seeds = 3;
  classify::FitConfig fit;
  classify::FitConfig pretrain_fit;
  std::vector<std::string> last_layers = {"norm.", "head."};
  classify::BackboneConfig backbone;
  std::filesystem::path backbone_weights;
};

struct EvalSection {
  std::vector<std::string> metrics = {"fid", "frd"};
  std::string extractor = "img-surrogate";
  int subsets = 3;
  std::size_t subset_size = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  int jobs = 1;
  IngestSection ingest;
  GanSection gan;
  PrivacySection privacy;
  ClassifySection classify;
  EvalSection eval;

  std::filesystem::path path;  // file the config came from, if any
  std::string digest;          // SHA-256 of the config bytes

  nlohmann::json ToJson() const;
  std::vector<std::optional<privacy::PrivacyBudget>> Budgets() const;
  std::vector<std::uint64_t> Seeds() const;
  bool NeedsSynthetic() const;
};

// Parses INI text. Relative paths resolve against base_dir. Every problem
// (unknown section or key, bad value, missing file, cross-section
// constraint) is collected into one ConfigError.
ExperimentConfig ParseConfig(std::string_view text, const std::filesystem::path& base_dir = ".");
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Budget list syntax: "1, 6, inf" ("∞" also accepted).
std::vector<std::optional<double>> ParseEpsilonList(std::string_view text);

struct PlannedCell {
  classify::RegimeKind regime = classify::RegimeKind::kReal;
  std::optional<privacy::PrivacyBudget> budget;  // as requested by the column
};

struct PlannedRun {
  PlannedCell cell;
  std::uint64_t seed = 0;
};

// Regimes x budgets, in config order.
std::vector<PlannedCell> PlanCells(const ExperimentConfig& config);
// Cells x seeds.
std::vector<PlannedRun> PlanRuns(const ExperimentConfig& config);

}  // namespace mammodp::experiment

#endif  // MAMMODP_EXPERIMENT_CONFIG_HPP_
