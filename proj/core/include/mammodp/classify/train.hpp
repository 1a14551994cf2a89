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

#ifndef MAMMODP_CLASSIFY_TRAIN_HPP_
#define MAMMODP_CLASSIFY_TRAIN_HPP_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/classify/model.hpp"
#include "mammodp/classify/regime.hpp"
#include "mammodp/privacy/accountant.hpp"

namespace mammodp::classify {

struct FitConfig {
  double lr = 1e-5;
  double weight_decay = 1e-8;
  double label_smoothing = 0.1;
  int batch_size = 128;
  int epochs = 300;
  double flip_p = 0.5;
  std::uint64_t seed = 0;
  // Literal reading of the selection rule; off selects the highest AUPRC.
  bool select_lowest_auprc = false;

  void Validate() const;
  nlohmann::json ToJson() const;
};

struct DpOptions {
  std::optional<privacy::PrivacyBudget> budget;
  double clip_norm = 1.0;
  // When set, used as-is instead of calibrating from the budget.
  std::optional<double> noise_multiplier;
  double report_delta = 1e-4;  // delta for reporting when no budget is set
  int group_k = 1;             // >1 adds a patient-level conversion
};

struct CheckpointRecord {
  int epoch = 0;
  long steps = 0;
  std::string digest;
  double val_auroc = 0.0;
  double val_auprc = 0.0;
  double train_loss = 0.0;
  std::optional<double> spent_epsilon;
  std::vector<double> trainable_values;

  nlohmann::json ToJson() const;
};

struct DpSummary {
  double sigma = 0.0;
  double sampling_rate = 0.0;
  double clip_norm = 0.0;
  std::int64_t planned_steps = 0;
  std::int64_t taken_steps = 0;
  double spent_epsilon = 0.0;
  double best_order = 0.0;
  double delta = 0.0;
  bool halted_by_budget = false;
  std::optional<privacy::PrivacyBudget> patient_level;
  privacy::AccountantLedger ledger;

  nlohmann::json ToJson() const;
};

struct TrainResult {
  std::vector<CheckpointRecord> records;
  std::optional<DpSummary> dp;
};

// Mini-batch training with label-smoothed cross entropy and flips as the
// only augmentation; one validation record per epoch.
TrainResult TrainNonPrivate(ClassifierModel& model, const ClassifierDataset& train, const ClassifierDataset& val,
                            const FitConfig& fit, TokenCache* cache = nullptr);

// DP-SGD: Poisson rate q = batch / N, round(1 / q) steps per epoch, sigma
// calibrated to the budget over all planned steps. Stops before any step
// whose accounting would overshoot the budget.
TrainResult TrainPrivate(ClassifierModel& model, const ClassifierDataset& train, const ClassifierDataset& val,
                         const FitConfig& fit, const DpOptions& dp, TokenCache* cache = nullptr);

// Highest validation AUPRC (lowest when `lowest`); ties go to the earliest.
std::size_t SelectBest(const std::vector<CheckpointRecord>& records, bool lowest = false);
void RestoreCheckpoint(ClassifierModel& model, const CheckpointRecord& record);

struct CurveScores {
  double auroc = 0.0;
  double auprc = 0.0;
};
CurveScores ScoreDataset(const ClassifierModel& model, const ClassifierDataset& data, TokenCache* cache = nullptr);

struct StageReport {
  std::string name;
  TrainablePolicy policy = TrainablePolicy::kHeadOnly;
  std::size_t n_train = 0;
  std::size_t n_synthetic = 0;
  std::size_t trainable_params = 0;
  bool private_stage = false;
  TrainResult result;
  std::size_t selected = 0;

  nlohmann::json ToJson() const;
};

struct RegimeData {
  ClassifierDataset real_train;
  ClassifierDataset real_val;
  ClassifierDataset syn_train;
  std::vector<std::pair<std::string, ClassifierDataset>> tests;
};

// Shares the non-private synthetic pretraining stage between regimes and
// budgets that only differ in what follows it.
class PretrainCache {
 public:
  struct Entry {
    BlobContainer state;
    StageReport report;
  };
  std::optional<Entry> Find(const std::string& key) const;
  void Insert(const std::string& key, Entry entry);

 private:
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

struct RunOptions {
  BackboneConfig backbone;
  const BlobContainer* backbone_weights = nullptr;
  FitConfig fit;
  std::optional<FitConfig> pretrain_fit;  // defaults to fit
  DpOptions dp;
  TokenCache* cache = nullptr;
  PretrainCache* pretrain_cache = nullptr;
};

struct RegimeReport {
  TrainRegime regime;
  std::vector<StageReport> stages;
  std::vector<std::pair<std::string, CurveScores>> tests;
  std::string final_digest;

  nlohmann::json ToJson() const;
};

// Runs one regime end to end and scores the selected model on every test
// set. The training data mix is audited against provenance tags.
RegimeReport RunRegime(const TrainRegime& regime, const RegimeData& data, const RunOptions& options,
                       ClassifierModel* final_model = nullptr);

}  // namespace mammodp::classify

#endif  // MAMMODP_CLASSIFY_TRAIN_HPP_
