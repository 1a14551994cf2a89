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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mammodp/classify/model.hpp"
#include "mammodp/classify/regime.hpp"
#include "mammodp/classify/train.hpp"
#include "mammodp/fixture/fixture.hpp"
#include "mammodp/nn/layers.hpp"
#include "mammodp/privacy/budget.hpp"

namespace mammodp::classify {
namespace {

BackboneConfig SmallBackbone() {
  BackboneConfig c;
  c.embed_dim = 8;
  c.depths = {1, 1, 1, 1};
  c.heads = {1, 2, 2, 4};
  return c;
}

ClassifierDataset Fixture(int patients, std::uint64_t seed, bool synthetic = false) {
  fixture::FixtureSpec spec;
  spec.n_patients = patients;
  spec.seed = seed;
  spec.patient_prefix = synthetic ? "S" : "P";
  auto patches = fixture::GeneratePatches(spec);
  if (synthetic) {
    for (auto& p : patches) {
      p.synthetic = true;
      p.provenance.patient_id.clear();
      p.provenance.source = ingest::Source::kSynthetic;
    }
  }
  return ClassifierDataset::From(std::move(patches));
}

ClassifierModel HeadOnly(std::uint64_t head_seed = 1) {
  return BuildClassifier(SmallBackbone(), nullptr, head_seed, PolicyPrefixes(TrainablePolicy::kHeadOnly));
}

FitConfig QuickFit(int epochs, int batch) {
  FitConfig f;
  f.lr = 5e-3;
  f.batch_size = batch;
  f.epochs = epochs;
  f.seed = 3;
  return f;
}

double RelativeError(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

TEST(Predict, SoftmaxOfTwoLogits) {
  EXPECT_EQ(MalignantProbability(0.0, 0.0), 0.5);
  EXPECT_NEAR(MalignantProbability(-10.0, 10.0), 1.0, 1e-4);
  EXPECT_NEAR(MalignantProbability(10.0, -10.0), 0.0, 1e-4);
}

TEST(Predict, BatchMatchesItemByItemInOrder) {
  const ClassifierModel model = HeadOnly();
  const ClassifierDataset data = Fixture(3, 1);
  const auto batch = Predict(model, data);
  ASSERT_EQ(batch.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto one = ClassifierDataset::From({data.patches[i]});
    const auto p = Predict(model, one);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(p[0], batch[i], 1e-12);
    EXPECT_GE(p[0], 0.0);
    EXPECT_LE(p[0], 1.0);
  }
}

TEST(Build, FreshModelGivesTwoFiniteLogits) {
  const ClassifierModel model = HeadOnly();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  ChannelImage img{3, 224, 224, std::vector<double>(3 * 224 * 224)};
  for (auto& v : img.data) v = u(rng);
  nn::NoGradGuard guard;
  const nn::Tensor logits = model.Logits({img});
  ASSERT_EQ(logits.shape(), (nn::Shape{1, 2}));
  for (double v : logits.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Build, TrainableMaskPerPolicy) {
  ClassifierModel model = HeadOnly();
  const auto d = static_cast<std::size_t>(model.backbone_config().out_dim());
  EXPECT_EQ(model.TrainableCount(), 2 * (d + 1));
  EXPECT_TRUE(model.FrozenBackbone());
  for (const auto& e : model.State()) EXPECT_EQ(e.tensor.requires_grad(), e.name.rfind("head.", 0) == 0) << e.name;

  model.SetTrainable(PolicyPrefixes(TrainablePolicy::kLastTwoLayers));
  EXPECT_EQ(model.TrainableCount(), 2 * (d + 1) + 2 * d);
  EXPECT_TRUE(model.FrozenBackbone());

  model.SetTrainable(PolicyPrefixes(TrainablePolicy::kAllParams));
  EXPECT_EQ(model.TrainableCount(), model.ParameterCount());
  EXPECT_FALSE(model.FrozenBackbone());
}

TEST(Build, RegimePoliciesFollowTheTable) {
  EXPECT_EQ(FinalPolicy(RegimeKind::kReal), TrainablePolicy::kHeadOnly);
  EXPECT_EQ(FinalPolicy(RegimeKind::kSyn), TrainablePolicy::kHeadOnly);
  EXPECT_EQ(FinalPolicy(RegimeKind::kRealPlusSyn), TrainablePolicy::kHeadOnly);
  EXPECT_EQ(FinalPolicy(RegimeKind::kSynPre), TrainablePolicy::kAllParams);
  EXPECT_EQ(FinalPolicy(RegimeKind::kSynPreThenRealFT), TrainablePolicy::kLastTwoLayers);
}

TEST(Build, WeightsRoundTripThroughContainer) {
  const ClassifierModel a = HeadOnly(1);
  BlobContainer weights;
  nn::StoreState(a.State(), weights);
  BackboneConfig other = SmallBackbone();
  other.seed = 99;
  const ClassifierModel b = BuildClassifier(other, &weights, 1, PolicyPrefixes(TrainablePolicy::kHeadOnly));
  EXPECT_EQ(a.BackboneDigest(), b.BackboneDigest());
  BackboneConfig wider = SmallBackbone();
  wider.embed_dim = 16;
  wider.heads = {1, 2, 4, 4};
  EXPECT_THROW(BuildClassifier(wider, &weights, 1, PolicyPrefixes(TrainablePolicy::kHeadOnly)), IoError);
}

TEST(Regime, BudgetRendering) {
  const auto six = privacy::PrivacyBudget::Make(6, 1e-4);
  EXPECT_EQ(RenderBudget(RegimeKind::kReal, six, false), "6");
  EXPECT_EQ(RenderBudget(RegimeKind::kReal, std::nullopt, false), "∞");
  EXPECT_EQ(RenderBudget(RegimeKind::kReal, std::nullopt, true), "inf");
  EXPECT_EQ(RenderBudget(RegimeKind::kSynPreThenRealFT, six, false), "∞|6");
  EXPECT_EQ(RenderBudget(RegimeKind::kSynPreThenRealFT, six, true), "inf|6");
  EXPECT_FALSE(EffectiveBudget(RegimeKind::kSyn, six).has_value());
  EXPECT_FALSE(EffectiveBudget(RegimeKind::kSynPre, six).has_value());
  EXPECT_TRUE(EffectiveBudget(RegimeKind::kRealPlusSyn, six).has_value());
  for (RegimeKind k : AllRegimes()) EXPECT_EQ(ParseRegime(RegimeToken(k)), k);
  EXPECT_THROW(ParseRegime("nope"), ConfigError);
}

TEST(SelectBest, ArgmaxWithEarliestTies) {
  auto records = [](std::vector<double> auprc) {
    std::vector<CheckpointRecord> r;
    for (std::size_t i = 0; i < auprc.size(); ++i) {
      CheckpointRecord c;
      c.epoch = static_cast<int>(i + 1);
      c.val_auprc = auprc[i];
      r.push_back(c);
    }
    return r;
  };
  EXPECT_EQ(SelectBest(records({0.5, 0.9, 0.7})), 1u);
  EXPECT_EQ(SelectBest(records({0.6, 0.6, 0.6})), 0u);
  EXPECT_EQ(SelectBest(records({0.5, 0.9, 0.7}), true), 0u);
  EXPECT_THROW(SelectBest({}), EmptyInputError);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> level(0, 20), size(1, 30);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(size(rng));
    for (auto& x : v) x = level(rng) / 20.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] > v[best]) best = i;
    EXPECT_EQ(SelectBest(records(v)), best);
  }
}

TEST(TrainNonPrivate, RecordsPerEpochFrozenBackboneDeterminism) {
  const ClassifierDataset train = Fixture(6, 1), val = Fixture(3, 2);
  ClassifierModel a = HeadOnly();
  const std::string backbone_before = a.BackboneDigest();
  std::vector<double> frozen_before;
  for (const auto& e : a.State())
    if (e.name.rfind("head.", 0) != 0) frozen_before.insert(frozen_before.end(), e.tensor.values().begin(), e.tensor.values().end());
  const auto ra = TrainNonPrivate(a, train, val, QuickFit(2, 4));
  ASSERT_EQ(ra.records.size(), 2u);
  for (const auto& r : ra.records) {
    EXPECT_GE(r.val_auroc, 0.0);
    EXPECT_LE(r.val_auroc, 1.0);
    EXPECT_GE(r.val_auprc, 0.0);
    EXPECT_LE(r.val_auprc, 1.0);
    EXPECT_FALSE(r.spent_epsilon.has_value());
  }
  std::vector<double> frozen_after;
  for (const auto& e : a.State())
    if (e.name.rfind("head.", 0) != 0) frozen_after.insert(frozen_after.end(), e.tensor.values().begin(), e.tensor.values().end());
  EXPECT_EQ(frozen_after, frozen_before);
  EXPECT_EQ(a.BackboneDigest(), backbone_before);

  ClassifierModel b = HeadOnly();
  const auto rb = TrainNonPrivate(b, train, val, QuickFit(2, 4));
  for (std::size_t i = 0; i < ra.records.size(); ++i) EXPECT_EQ(ra.records[i].digest, rb.records[i].digest);
  EXPECT_NE(ra.records[0].digest, ra.records[1].digest);
  EXPECT_THROW(TrainNonPrivate(b, ClassifierDataset{}, val, QuickFit(1, 4)), EmptyInputError);
}

TEST(TrainNonPrivate, SeparableStripeImagesReduceLossEveryEpoch) {
  // Horizontal stripes are benign, vertical stripes malignant.
  std::vector<ingest::MassPatch> patches;
  for (int i = 0; i < 12; ++i) {
    ingest::MassPatch p;
    const bool malignant = i % 2;
    p.pixels = GrayImage(128, 128);
    const int period = 8 + 2 * (i / 2);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) p.pixels.at(x, y) = ((malignant ? x : y) / (period / 2)) % 2 ? 0.9 : 0.1;
    p.label = malignant ? ingest::Label::kMalignant : ingest::Label::kBenign;
    p.provenance.patient_id = "T" + std::to_string(i);
    p.provenance.image_id = "t" + std::to_string(i);
    patches.push_back(p);
  }
  const auto data = ClassifierDataset::From(patches);
  ClassifierModel model = HeadOnly();
  FitConfig fit = QuickFit(10, 12);
  fit.lr = 1e-3;
  fit.flip_p = 0.0;
  const auto result = TrainNonPrivate(model, data, data, fit);
  ASSERT_EQ(result.records.size(), 10u);
  for (std::size_t i = 1; i < result.records.size(); ++i) {
    EXPECT_LT(result.records[i].train_loss, result.records[i - 1].train_loss) << "epoch " << i + 1;
  }
}

TEST(TrainNonPrivate, RestoreCheckpointReproducesParameters) {
  const ClassifierDataset train = Fixture(4, 1), val = Fixture(2, 2);
  ClassifierModel model = HeadOnly();
  const auto result = TrainNonPrivate(model, train, val, QuickFit(3, 4));
  RestoreCheckpoint(model, result.records[0]);
  EXPECT_EQ(model.Digest(), result.records[0].digest);
}

TEST(TrainPrivate, SpentEpsilonNeverExceedsBudget) {
  const ClassifierDataset train = Fixture(6, 1), val = Fixture(3, 2);
  for (double eps : {1.0, 6.0, 12.0, 20.0, 60.0}) {
    ClassifierModel model = HeadOnly();
    DpOptions dp;
    dp.budget = privacy::PrivacyBudget::Make(eps, 1e-4);
    const auto result = TrainPrivate(model, train, val, QuickFit(3, 4), dp);
    ASSERT_TRUE(result.dp.has_value());
    EXPECT_LE(result.dp->spent_epsilon, eps);
    for (const auto& r : result.records) {
      ASSERT_TRUE(r.spent_epsilon.has_value());
      EXPECT_LE(*r.spent_epsilon, eps);
    }
    EXPECT_EQ(result.dp->ledger.total_steps(), result.dp->taken_steps);
  }
}

TEST(TrainPrivate, HaltsBeforeOvershootingAFixedNoiseBudget) {
  const ClassifierDataset train = Fixture(6, 1), val = Fixture(3, 2);
  ClassifierModel model = HeadOnly();
  DpOptions dp;
  dp.budget = privacy::PrivacyBudget::Make(2.0, 1e-4);
  dp.noise_multiplier = 0.9;
  const auto result = TrainPrivate(model, train, val, QuickFit(50, 4), dp);
  EXPECT_TRUE(result.dp->halted_by_budget);
  EXPECT_LT(result.dp->taken_steps, result.dp->planned_steps);
  EXPECT_LE(result.dp->spent_epsilon, 2.0);
}

TEST(TrainPrivate, AccountingIsDataIndependentAcrossSeeds) {
  const ClassifierDataset train = Fixture(6, 1), val = Fixture(3, 2);
  DpOptions dp;
  dp.budget = privacy::PrivacyBudget::Make(6.0, 1e-4);
  ClassifierModel a = HeadOnly(), b = HeadOnly();
  FitConfig fa = QuickFit(3, 4), fb = QuickFit(3, 4);
  fb.seed = 17;
  const auto ra = TrainPrivate(a, train, val, fa, dp), rb = TrainPrivate(b, train, val, fb, dp);
  ASSERT_EQ(ra.records.size(), rb.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) EXPECT_EQ(*ra.records[i].spent_epsilon, *rb.records[i].spent_epsilon);
  EXPECT_NE(ra.records.back().digest, rb.records.back().digest);
}

TEST(TrainPrivate, DegenerateNoiseTracksNonPrivateTraining) {
  const ClassifierDataset train = Fixture(5, 1), val = Fixture(3, 2);
  const FitConfig fit = QuickFit(5, static_cast<int>(train.size()));
  ClassifierModel plain = HeadOnly(), priv = HeadOnly();
  const auto rp = TrainNonPrivate(plain, train, val, fit);
  DpOptions dp;
  dp.noise_multiplier = 1e-12;
  dp.clip_norm = 1e3;
  const auto rq = TrainPrivate(priv, train, val, fit, dp);
  ASSERT_EQ(rp.records.size(), rq.records.size());
  for (std::size_t i = 0; i < rp.records.size(); ++i) {
    EXPECT_LT(RelativeError(rq.records[i].trainable_values, rp.records[i].trainable_values), 1e-5) << "epoch " << i + 1;
  }
}

TEST(TrainPrivate, NeedsBudgetOrNoise) {
  const ClassifierDataset train = Fixture(2, 1), val = Fixture(2, 2);
  ClassifierModel model = HeadOnly();
  EXPECT_THROW(TrainPrivate(model, train, val, QuickFit(1, 2), DpOptions{}), ConfigError);
}

class RegimeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_.real_train = Fixture(6, 1);
    data_.real_val = Fixture(3, 2);
    data_.syn_train = Fixture(4, 3, true);
    data_.tests = {{"internal", Fixture(3, 4)}};
    options_.backbone = SmallBackbone();
    options_.fit = QuickFit(2, 4);
    options_.pretrain_fit = QuickFit(1, 8);
    options_.pretrain_fit->lr = 2e-4;
    options_.cache = &cache_;
    options_.pretrain_cache = &pretrain_;
  }
  RegimeData data_;
  RunOptions options_;
  TokenCache cache_;
  PretrainCache pretrain_;
};

TEST_F(RegimeTest, SynRegimeTouchesNoRealTrainingImage) {
  const auto report = RunRegime({RegimeKind::kSyn, privacy::PrivacyBudget::Make(6, 1e-4)}, data_, options_);
  ASSERT_EQ(report.stages.size(), 1u);
  EXPECT_EQ(report.stages[0].n_train, data_.syn_train.size());
  EXPECT_EQ(report.stages[0].n_synthetic, report.stages[0].n_train);
  EXPECT_FALSE(report.stages[0].private_stage);
  EXPECT_FALSE(report.regime.budget.has_value());
  ASSERT_EQ(report.tests.size(), 1u);
}

TEST_F(RegimeTest, RealPlusSynConcatenatesAndIsPrivate) {
  const auto report = RunRegime({RegimeKind::kRealPlusSyn, privacy::PrivacyBudget::Make(6, 1e-4)}, data_, options_);
  ASSERT_EQ(report.stages.size(), 1u);
  EXPECT_EQ(report.stages[0].n_train, data_.real_train.size() + data_.syn_train.size());
  EXPECT_EQ(report.stages[0].n_synthetic, data_.syn_train.size());
  EXPECT_TRUE(report.stages[0].private_stage);
  EXPECT_LE(report.stages[0].result.dp->spent_epsilon, 6.0);
}

TEST_F(RegimeTest, TwoStageRegimeUsesPretrainThenPrivateFineTune) {
  const auto report =
      RunRegime({RegimeKind::kSynPreThenRealFT, privacy::PrivacyBudget::Make(6, 1e-4)}, data_, options_);
  ASSERT_EQ(report.stages.size(), 2u);
  EXPECT_EQ(report.stages[0].policy, TrainablePolicy::kAllParams);
  EXPECT_FALSE(report.stages[0].private_stage);
  EXPECT_EQ(report.stages[0].n_synthetic, report.stages[0].n_train);
  EXPECT_EQ(report.stages[1].policy, TrainablePolicy::kLastTwoLayers);
  EXPECT_TRUE(report.stages[1].private_stage);
  EXPECT_EQ(report.stages[1].n_synthetic, 0u);
  EXPECT_EQ(RenderBudget(report.regime.kind, report.regime.budget, false), "∞|6");
}

TEST_F(RegimeTest, MissingSyntheticSetIsAConfigError) {
  data_.syn_train = ClassifierDataset{};
  EXPECT_THROW(RunRegime({RegimeKind::kSyn, std::nullopt}, data_, options_), ConfigError);
  EXPECT_THROW(RunRegime({RegimeKind::kSynPre, std::nullopt}, data_, options_), ConfigError);
}

TEST_F(RegimeTest, ProvenanceAuditRejectsMixedSets) {
  data_.real_train = data_.real_train.Concat(data_.syn_train);
  EXPECT_THROW(RunRegime({RegimeKind::kReal, std::nullopt}, data_, options_), ContractViolation);
}

}  // namespace
}  // namespace mammodp::classify
