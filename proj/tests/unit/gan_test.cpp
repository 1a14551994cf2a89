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

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mammodp/eval/metrics.hpp"
#include "mammodp/fixture/fixture.hpp"
#include "mammodp/gan/augment.hpp"
#include "mammodp/gan/losses.hpp"
#include "mammodp/gan/model.hpp"
#include "mammodp/gan/train.hpp"
#include "mammodp/nn/ops.hpp"

namespace mammodp::gan {
namespace {

namespace fs = std::filesystem;

std::vector<ingest::MassPatch> FixturePatches(int patients) {
  fixture::FixtureSpec spec;
  spec.n_patients = patients;
  return fixture::GeneratePatches(spec);
}

GanTrainConfig SmallConfig() {
  GanTrainConfig c;
  c.batch_size = 2;
  c.epochs = 1;
  c.arch.base_width = 2;
  c.seed = 5;
  return c;
}

TEST(Augment, DeterministicPerSeed) {
  const GrayImage img = fixture::RenderPatch(128, ingest::Label::kMalignant, 3, false).pixels;
  Rng a = MakeRng(1), b = MakeRng(1);
  EXPECT_EQ(Augment(img, {}, a), Augment(img, {}, b));
}

TEST(Augment, ConstantImageStaysConstant) {
  const GrayImage img(128, 128, 0.42);
  Rng rng = MakeRng(2);
  for (int i = 0; i < 10; ++i) {
    const GrayImage out = Augment(img, {}, rng);
    ASSERT_EQ(out.width, 128);
    ASSERT_EQ(out.height, 128);
    for (double p : out.pixels) ASSERT_NEAR(p, 0.42, 1e-15);
  }
}

TEST(Augment, FlipFrequencyAndCropRanges) {
  Rng rng = MakeRng(3);
  const AugmentConfig cfg;
  int h = 0, v = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const AugmentParams p = DrawAugmentParams(128, 128, cfg, rng);
    h += p.flip_horizontal;
    v += p.flip_vertical;
    ASSERT_GE(p.crop_x, 0);
    ASSERT_GE(p.crop_y, 0);
    ASSERT_LE(p.crop_x + p.crop_w, 128);
    ASSERT_LE(p.crop_y + p.crop_h, 128);
    const double ratio = static_cast<double>(p.crop_w) / p.crop_h;
    ASSERT_GE(ratio, cfg.ratio_low - 0.02);
    ASSERT_LE(ratio, cfg.ratio_high + 0.02);
  }
  EXPECT_GE(h / static_cast<double>(n), 0.48);
  EXPECT_LE(h / static_cast<double>(n), 0.52);
  EXPECT_GE(v / static_cast<double>(n), 0.48);
  EXPECT_LE(v / static_cast<double>(n), 0.52);
}

TEST(Smoothing, RangeAndMean) {
  Rng rng = MakeRng(4);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double t = SmoothRealLabel(rng);
    ASSERT_GE(t, 0.7);
    ASSERT_LE(t, 1.2);
    sum += t;
  }
  EXPECT_NEAR(sum / n, 0.95, 0.005);
  EXPECT_EQ(kFakeTarget, 0.0);
  EXPECT_THROW(SmoothRealLabel(rng, {1.2, 0.7}), ContractViolation);
}

TEST(Losses, AnalyticValues) {
  EXPECT_NEAR(DiscriminatorLoss(0.5, 0.5, 1.0), 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(DiscriminatorLoss(0.5, 0.5, 0.7), 1.7 * std::log(2.0), 1e-12);
  EXPECT_NEAR(DiscriminatorLoss(1.0, 0.0, 1.0), 0.0, 1e-6);
  EXPECT_NEAR(GeneratorLoss(0.5), std::log(2.0), 1e-12);
  EXPECT_NEAR(GeneratorLoss(1.0), 0.0, 1e-6);
  EXPECT_THROW(DiscriminatorLoss(1.5, 0.5, 1.0), ContractViolation);
  EXPECT_THROW(GeneratorLoss(-0.1), ContractViolation);
}

TEST(Losses, RandomTriplesMatchClosedForm) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> p(1e-6, 1 - 1e-6), t(0.7, 1.2);
  for (int i = 0; i < 1000; ++i) {
    const double dr = p(rng), df = p(rng), tt = t(rng);
    const double cr = std::clamp(dr, 1e-7, 1 - 1e-7), cf = std::clamp(df, 1e-7, 1 - 1e-7);
    EXPECT_NEAR(DiscriminatorLoss(dr, df, tt), -(tt * std::log(cr) + std::log(1 - cf)), 1e-9);
    EXPECT_NEAR(GeneratorLoss(df), -std::log(cf), 1e-9);
  }
}

TEST(Losses, LogitFormsMatchScalarFormsAndGradients) {
  const std::vector<double> real_logits = {0.3, -1.1}, fake_logits = {0.8, -0.2}, targets = {0.9, 1.1};
  nn::Tensor r = nn::Tensor::FromData({2, 1}, real_logits, true);
  nn::Tensor f = nn::Tensor::FromData({2, 1}, fake_logits, true);
  auto sig = [](double l) { return 1 / (1 + std::exp(-l)); };
  double want = 0;
  for (int i = 0; i < 2; ++i) want += DiscriminatorLoss(sig(real_logits[i]), sig(fake_logits[i]), targets[i]) / 2;
  nn::Tensor d = DiscriminatorLossFromLogits(r, f, targets);
  EXPECT_NEAR(d.item(), want, 1e-12);

  nn::Tensor g = GeneratorLossFromLogits(f);
  g.Backward();
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    auto loss_at = [&](double l) {
      std::vector<double> v = fake_logits;
      v[i] = l;
      return GeneratorLossFromLogits(nn::Tensor::FromData({2, 1}, v)).item();
    };
    const double numeric = (loss_at(fake_logits[i] + h) - loss_at(fake_logits[i] - h)) / (2 * h);
    EXPECT_NEAR(f.grad()[i], numeric, 1e-4 * std::fabs(numeric));
  }
}

TEST(Generator, ShapeRangeDeterminismAndContract) {
  GanArchitecture arch;
  arch.base_width = 2;
  GanModel model(arch, 1);
  Rng rng = MakeRng(6);
  nn::Tensor z = SampleNoise(3, kNoiseDim, rng);
  const std::vector<int> labels = {0, 1, 1};
  nn::NoGradGuard guard;
  nn::Tensor a = model.generator.Forward(z, labels, false);
  nn::Tensor b = model.generator.Forward(z, labels, false);
  EXPECT_EQ(a.shape(), (nn::Shape{3, 1, 128, 128}));
  for (double v : a.values()) {
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
  }
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_THROW(model.generator.Forward(nn::Tensor::Zeros({3, 50}), labels, false), ContractViolation);
  nn::Tensor d = model.discriminator.Forward(a, labels, false);
  EXPECT_EQ(d.shape(), (nn::Shape{3, 1}));
}

TEST(Generator, OutputRespondsToNoiseCoordinates) {
  GanArchitecture arch;
  arch.base_width = 2;
  GanModel model(arch, 2);
  Rng rng = MakeRng(7);
  nn::Tensor z = SampleNoise(1, kNoiseDim, rng);
  const std::vector<int> label = {1};
  nn::NoGradGuard guard;
  const auto base = model.generator.Forward(z, label, false);
  std::vector<double> ref(base.values().begin(), base.values().end());
  std::uniform_int_distribution<int> coord(0, kNoiseDim - 1);
  for (int k = 0; k < 5; ++k) {
    nn::Tensor zz = nn::Tensor::FromData({1, kNoiseDim}, std::vector<double>(z.values().begin(), z.values().end()));
    zz.values()[coord(rng)] += 1e-3;
    const auto out = model.generator.Forward(zz, label, false);
    double diff = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) diff += std::fabs(out.values()[i] - ref[i]);
    EXPECT_GT(diff / 1e-3, 0.0);
  }
}

TEST(Training, ShortRunIsFiniteLiveAndReproducible) {
  const auto data = FixturePatches(8);
  GanTrainConfig cfg = SmallConfig();
  cfg.epochs = 1000;
  cfg.max_steps = 200;
  const auto run = TrainMcgan(cfg, data);
  ASSERT_EQ(run.steps.size(), 200u);
  for (const auto& s : run.steps) {
    ASSERT_TRUE(std::isfinite(s.d_loss));
    ASSERT_TRUE(std::isfinite(s.g_loss));
    for (double t : s.real_targets) {
      ASSERT_GE(t, 0.7);
      ASSERT_LE(t, 1.2);
    }
  }
  ASSERT_FALSE(run.checkpoints.empty());
  GanModel model = LoadGanModel(run.checkpoints.back().blob);
  EXPECT_EQ(model.Digest(), run.checkpoints.back().digest);
  Rng rng = MakeRng(8);
  nn::Tensor z = SampleNoise(2, kNoiseDim, rng);
  nn::Tensor zz = nn::Tensor::FromData({2, kNoiseDim}, std::vector<double>(z.values().begin(), z.values().end()));
  nn::NoGradGuard guard;
  const std::vector<int> benign = {0, 0}, malignant = {1, 1};
  const auto gb = model.generator.Forward(z, benign, false);
  const auto gm = model.generator.Forward(zz, malignant, false);
  double diff = 0;
  for (std::int64_t i = 0; i < gb.numel(); ++i) diff += std::fabs(gb.values()[i] - gm.values()[i]);
  EXPECT_GT(diff / static_cast<double>(gb.numel()), 0.0);

  GanTrainConfig short_cfg = cfg;
  short_cfg.max_steps = 12;
  const auto a = TrainMcgan(short_cfg, data), b = TrainMcgan(short_cfg, data);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].d_loss, b.steps[i].d_loss);
    EXPECT_EQ(a.steps[i].g_loss, b.steps[i].g_loss);
  }
  EXPECT_EQ(a.checkpoints.back().digest, b.checkpoints.back().digest);
}

TEST(Training, ZeroStepsKeepsInitialization) {
  GanTrainConfig cfg = SmallConfig();
  cfg.epochs = 0;
  const auto run = TrainMcgan(cfg, FixturePatches(2));
  ASSERT_EQ(run.checkpoints.size(), 1u);
  EXPECT_TRUE(run.steps.empty());
  EXPECT_EQ(run.checkpoints[0].digest, GanModel(cfg.arch, cfg.seed).Digest());
}

TEST(Training, SingleClassWarnsAndProceeds) {
  auto data = FixturePatches(4);
  for (auto& p : data) p.label = ingest::Label::kBenign;
  GanTrainConfig cfg = SmallConfig();
  cfg.max_steps = 2;
  const auto run = TrainMcgan(cfg, data);
  EXPECT_FALSE(run.warnings.empty());
  EXPECT_EQ(run.steps.size(), 2u);
}

TEST(Training, CheckpointsPersistAndReload) {
  const fs::path dir = fs::temp_directory_path() / "mammodp_gan_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  GanTrainConfig cfg = SmallConfig();
  cfg.epochs = 3;
  cfg.checkpoint_every = 1;
  const auto data = FixturePatches(1);
  const auto run = TrainMcgan(cfg, data, dir);
  ASSERT_EQ(run.checkpoints.size(), 3u);
  for (const auto& ck : run.checkpoints) {
    ASSERT_TRUE(fs::exists(ck.path));
    const auto loaded = BlobContainer::Load(ck.path);
    EXPECT_EQ(LoadGanModel(loaded).Digest(), ck.digest);
    EXPECT_EQ(CheckpointConfig(loaded).seed, cfg.seed);
  }
}

TEST(Sampling, CountsRangeAndDeterminism) {
  GanArchitecture arch;
  arch.base_width = 2;
  GanModel model(arch, 3);
  const auto a = SampleSyntheticDataset(model, 3, 4, 9);
  ASSERT_EQ(a.size(), 7u);
  int malignant = 0;
  for (const auto& p : a) {
    malignant += p.label == ingest::Label::kMalignant;
    EXPECT_TRUE(p.synthetic);
    EXPECT_EQ(p.provenance.source, ingest::Source::kSynthetic);
    for (double v : p.pixels.pixels) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
  EXPECT_EQ(malignant, 4);
  const auto only = SampleSyntheticDataset(model, 0, 5, 9);
  ASSERT_EQ(only.size(), 5u);
  for (const auto& p : only) EXPECT_EQ(p.label, ingest::Label::kMalignant);
  const auto b = SampleSyntheticDataset(model, 3, 4, 9);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].pixels, b[i].pixels);
  EXPECT_THROW(SampleSyntheticDataset(model, -1, 2, 9), ContractViolation);
}

TEST(Selection, ArgminWithEarliestTie) {
  const auto data = FixturePatches(6);
  std::vector<GrayImage> validation;
  for (const auto& p : data) validation.push_back(p.pixels);
  const auto metric = eval::MakeSetMetric("frd", "");
  auto constant = [](double v) {
    return [v] {
      std::vector<GrayImage> out;
      for (int i = 0; i < 6; ++i) out.push_back(fixture::RenderPatch(128, ingest::Label::kBenign, 50 + i, true).pixels);
      for (auto& img : out)
        for (auto& p : img.pixels) p = std::clamp(p + v, 0.0, 1.0);
      return out;
    };
  };
  const std::vector<CheckpointCandidate> single = {{"a", 1, constant(0.2)}};
  EXPECT_EQ(SelectCheckpoint(single, validation, metric), 0u);
  EXPECT_THROW(SelectCheckpoint(std::span<const CheckpointCandidate>{}, validation, metric), EmptyInputError);

  const std::vector<CheckpointCandidate> with_copy = {
      {"a", 1, constant(0.3)}, {"copy", 2, [&] { return validation; }}, {"b", 3, constant(0.1)}};
  std::vector<double> scores;
  EXPECT_EQ(SelectCheckpoint(with_copy, validation, metric, &scores), 1u);
  EXPECT_NEAR(scores[1], 0.0, 1e-9);

  const std::vector<CheckpointCandidate> tied = {
      {"late", 5, [&] { return validation; }}, {"early", 2, [&] { return validation; }}};
  EXPECT_EQ(SelectCheckpoint(tied, validation, metric), 1u);
}

TEST(Selection, MatchesBruteForceSweepOverTrainedCheckpoints) {
  const auto data = FixturePatches(3);
  GanTrainConfig cfg = SmallConfig();
  cfg.epochs = 3;
  cfg.checkpoint_every = 1;
  const auto run = TrainMcgan(cfg, data);
  ASSERT_EQ(run.checkpoints.size(), 3u);
  const auto metric = eval::MakeSetMetric("frd", "");
  std::vector<double> scores;
  const std::size_t chosen = SelectGanCheckpoint(run.checkpoints, data, metric, 11, &scores);
  std::vector<GrayImage> reference;
  for (const auto& p : data) reference.push_back(p.pixels);
  std::size_t best = 0;
  double best_score = 0;
  for (std::size_t i = 0; i < run.checkpoints.size(); ++i) {
    GanModel m = LoadGanModel(run.checkpoints[i].blob);
    std::vector<GrayImage> imgs;
    int nb = 0, nm = 0;
    for (const auto& p : data) (p.label == ingest::Label::kMalignant ? nm : nb) += 1;
    for (auto& p : SampleSyntheticDataset(m, nb, nm, 11)) imgs.push_back(p.pixels);
    std::vector<std::string> w;
    const double s = metric.distance(metric.featurize(imgs), metric.featurize(reference), w);
    EXPECT_EQ(s, scores[i]);
    if (i == 0 || s < best_score) {
      best = i;
      best_score = s;
    }
  }
  EXPECT_EQ(chosen, best);
}

}  // namespace
}  // namespace mammodp::gan
