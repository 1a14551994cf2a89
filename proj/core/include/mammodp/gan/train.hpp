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

#ifndef MAMMODP_GAN_TRAIN_HPP_
#define MAMMODP_GAN_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/common/container.hpp"
#include "mammodp/eval/metrics.hpp"
#include "mammodp/gan/augment.hpp"
#include "mammodp/gan/losses.hpp"
#include "mammodp/gan/model.hpp"
#include "mammodp/ingest/records.hpp"

namespace mammodp::gan {

struct GanTrainConfig {
  GanArchitecture arch;
  int batch_size = 16;
  int epochs = 1;
  long max_steps = 0;  // 0: no cap beyond epochs
  SmoothingRange smoothing;
  AugmentConfig augment;
  double g_lr = 2e-4;
  double d_lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // epochs; 0 keeps only the final checkpoint

  void Validate() const;
  nlohmann::json ToJson() const;
  static GanTrainConfig FromJson(const nlohmann::json& j);
};

struct StepLog {
  long step = 0;
  int epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  std::vector<double> real_targets;
};

struct EpochLog {
  int epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  long steps = 0;
};

struct GanCheckpoint {
  int epoch = 0;
  long step = 0;
  std::string digest;
  std::filesystem::path path;  // empty when not persisted
  BlobContainer blob;
};

struct GanTrainResult {
  GanModel model;
  std::vector<StepLog> steps;
  std::vector<EpochLog> epochs;
  std::vector<GanCheckpoint> checkpoints;
  std::vector<std::string> warnings;
};

// Alternating D-step / G-step per batch. Fully determined by config.seed:
// shuffling is keyed by epoch, augmentation by (epoch, sample index), and
// noise plus smoothing targets come from one stream saved in checkpoints.
// When out_dir is set, checkpoints are written as out_dir/epoch_<n>.ckpt.
GanTrainResult TrainMcgan(const GanTrainConfig& config, std::span<const ingest::MassPatch> data,
                          const std::filesystem::path& out_dir = {});

GanModel LoadGanModel(const BlobContainer& checkpoint);
GanTrainConfig CheckpointConfig(const BlobContainer& checkpoint);

// Labels: n_benign benign images first, then malignant. Pixels are mapped
// from [-1, 1] to [0, 1]; generation runs in eval mode.
std::vector<ingest::MassPatch> SampleSyntheticDataset(GanModel& model, int n_benign, int n_malignant,
                                                      std::uint64_t seed);

struct CheckpointCandidate {
  std::string id;
  int epoch = 0;
  std::function<std::vector<GrayImage>()> sample;
};

// argmin over candidates of metric(samples, validation); ties go to the
// earliest epoch. Scores, if requested, follow candidate order.
std::size_t SelectCheckpoint(std::span<const CheckpointCandidate> candidates, std::span<const GrayImage> validation,
                             const eval::SetMetric& metric, std::vector<double>* scores = nullptr);

// Samples as many images per checkpoint as there are validation patches,
// matching their label counts.
std::size_t SelectGanCheckpoint(std::span<const GanCheckpoint> checkpoints,
                                std::span<const ingest::MassPatch> validation, const eval::SetMetric& metric,
                                std::uint64_t seed, std::vector<double>* scores = nullptr);

}  // namespace mammodp::gan

#endif  // MAMMODP_GAN_TRAIN_HPP_
