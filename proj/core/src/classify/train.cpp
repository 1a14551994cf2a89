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

#include "mammodp/classify/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/hash.hpp"
#include "mammodp/common/rng.hpp"
#include "mammodp/eval/curves.hpp"
#include "mammodp/nn/layers.hpp"
#include "mammodp/nn/optim.hpp"
#include "mammodp/privacy/dp_sgd.hpp"

namespace mammodp::classify {
namespace {

constexpr std::uint64_t kShuffleStream = 0xC1A55;
constexpr std::uint64_t kFlipStream = 0xF11B;
constexpr std::uint64_t kPoissonStream = 0x9015;
constexpr std::uint64_t kNoiseStream = 0x7015E;

int DrawVariant(std::uint64_t seed, int epoch, std::size_t idx, double flip_p) {
  Rng rng = MakeRng(seed, {kFlipStream, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(idx)});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int variant = 0;
  if (u(rng) < flip_p) variant |= 1;
  if (u(rng) < flip_p) variant |= 2;
  return variant;
}

nn::AdamConfig OptimizerConfig(const FitConfig& fit) {
  nn::AdamConfig c;
  c.lr = fit.lr;
  c.weight_decay = fit.weight_decay;
  c.decoupled_weight_decay = true;
  return c;
}

std::vector<nn::Tensor> TrainableParams(const ClassifierModel& model) {
  auto params = nn::Parameters(model.TrainableState());
  if (params.empty()) throw ContractViolation("classifier has no trainable parameters");
  return params;
}

void RequireTrainable(const ClassifierDataset& train, const ClassifierDataset& val) {
  if (train.size() == 0) throw EmptyInputError("classifier training set is empty");
  if (val.size() == 0) throw EmptyInputError("classifier validation set is empty");
}

CheckpointRecord MakeRecord(const ClassifierModel& model, const std::vector<nn::Tensor>& params,
                            const ClassifierDataset& val, TokenCache* cache, int epoch, long steps,
                            double train_loss) {
  CheckpointRecord r;
  r.epoch = epoch;
  r.steps = steps;
  r.digest = model.Digest();
  const CurveScores s = ScoreDataset(model, val, cache);
  r.val_auroc = s.auroc;
  r.val_auprc = s.auprc;
  r.train_loss = train_loss;
  r.trainable_values = nn::Flatten(params);
  return r;
}

// Per-sample gradients over the trainable parameters, one forward/backward
// per sample.
class ClassifierGradients : public privacy::PerSampleGradientSource {
 public:
  ClassifierGradients(ClassifierModel& model, const ClassifierDataset& data, const FitConfig& fit,
                      TokenCache* cache)
      : model_(model),
        data_(data),
        fit_(fit),
        cache_(cache),
        params_(TrainableParams(model)),
        optimizer_(params_, OptimizerConfig(fit)),
        labels_(data.Labels()),
        variants_(data.size(), 0) {
    if (model_.FrozenBackbone()) digest_ = model_.BackboneDigest();
    for (const auto& p : params_) dim_ += static_cast<std::size_t>(p.numel());
  }

  std::size_t dimension() const override { return dim_; }

  void SetVariants(int epoch) {
    for (std::size_t i = 0; i < data_.size(); ++i) variants_[i] = DrawVariant(fit_.seed, epoch, i, fit_.flip_p);
  }

  std::vector<double> PerSampleGradient(std::size_t index) override {
    for (auto& p : params_) p.ZeroGrad();
    const std::size_t rows[1] = {index};
    const int variants[1] = {variants_[index]};
    const int labels[1] = {labels_[index]};
    const nn::Tensor logits =
        BatchLogits(model_, data_, rows, variants, cache_, digest_.empty() ? nullptr : &digest_);
    nn::Tensor loss = nn::SmoothedCrossEntropy(logits, labels, fit_.label_smoothing);
    loss_sum_ += loss.item();
    ++loss_count_;
    loss.Backward();
    std::vector<double> g;
    g.reserve(dim_);
    for (const auto& p : params_) {
      if (p.has_grad()) {
        g.insert(g.end(), p.grad().begin(), p.grad().end());
      } else {
        g.insert(g.end(), static_cast<std::size_t>(p.numel()), 0.0);
      }
    }
    return g;
  }

  void ApplyUpdate(std::span<const double> gradient) override {
    std::size_t offset = 0;
    for (auto& p : params_) {
      auto grad = p.grad();
      std::copy_n(gradient.begin() + static_cast<std::ptrdiff_t>(offset), grad.size(), grad.begin());
      offset += grad.size();
    }
    optimizer_.Step();
    for (auto& p : params_) p.ZeroGrad();
  }

  double TakeMeanLoss() {
    const double mean = loss_count_ ? loss_sum_ / static_cast<double>(loss_count_) : 0.0;
    loss_sum_ = 0.0;
    loss_count_ = 0;
    return mean;
  }

  const std::vector<nn::Tensor>& params() const { return params_; }

 private:
  ClassifierModel& model_;
  const ClassifierDataset& data_;
  const FitConfig& fit_;
  TokenCache* cache_;
  std::vector<nn::Tensor> params_;
  nn::Adam optimizer_;
  std::vector<int> labels_;
  std::vector<int> variants_;
  std::string digest_;
  std::size_t dim_ = 0;
  double loss_sum_ = 0.0;
  long loss_count_ = 0;
};

nlohmann::json BudgetJson(const std::optional<privacy::PrivacyBudget>& b) {
  if (!b) return nullptr;
  return {{"epsilon", b->epsilon}, {"delta", b->delta}};
}

std::size_t ExpectedTrainable(const ClassifierModel& model, TrainablePolicy policy,
                              const std::vector<std::string>& last_layers) {
  const auto dim = static_cast<std::size_t>(model.backbone_config().out_dim());
  const std::size_t head = kNumClasses * (dim + 1);
  switch (policy) {
    case TrainablePolicy::kHeadOnly:
      return head;
    case TrainablePolicy::kLastTwoLayers: {
      std::size_t n = 0;
      for (const auto& e : model.State()) {
        for (const auto& p : last_layers) {
          if (e.name.rfind(p, 0) == 0) {
            n += static_cast<std::size_t>(e.tensor.numel());
            break;
          }
        }
      }
      return n;
    }
    case TrainablePolicy::kAllParams:
      return model.ParameterCount();
  }
  return 0;
}

}  // namespace

void FitConfig::Validate() const {
  std::vector<std::string> issues;
  if (!(lr > 0.0)) issues.push_back("classifier lr must be > 0");
  if (!(weight_decay >= 0.0)) issues.push_back("classifier weight_decay must be >= 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) issues.push_back("label_smoothing must be in [0, 1)");
  if (batch_size < 1) issues.push_back("classifier batch_size must be >= 1");
  if (epochs < 1) issues.push_back("classifier epochs must be >= 1");
  if (!(flip_p >= 0.0 && flip_p <= 1.0)) issues.push_back("flip_p must be in [0, 1]");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

nlohmann::json FitConfig::ToJson() const {
  return {{"lr", lr},
          {"weight_decay", weight_decay},
          {"label_smoothing", label_smoothing},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"flip_p", flip_p},
          {"seed", seed},
          {"select_lowest_auprc", select_lowest_auprc}};
}

nlohmann::json CheckpointRecord::ToJson() const {
  nlohmann::json j = {{"epoch", epoch},          {"steps", steps},         {"digest", digest},
                      {"val_auroc", val_auroc},  {"val_auprc", val_auprc}, {"train_loss", train_loss}};
  j["spent_epsilon"] = spent_epsilon ? nlohmann::json(*spent_epsilon) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json DpSummary::ToJson() const {
  return {{"sigma", sigma},
          {"sampling_rate", sampling_rate},
          {"clip_norm", clip_norm},
          {"planned_steps", planned_steps},
          {"taken_steps", taken_steps},
          {"spent_epsilon", spent_epsilon},
          {"best_order", best_order},
          {"delta", delta},
          {"halted_by_budget", halted_by_budget},
          {"patient_level", BudgetJson(patient_level)},
          {"ledger", ledger.ToJson()}};
}

CurveScores ScoreDataset(const ClassifierModel& model, const ClassifierDataset& data, TokenCache* cache) {
  const std::vector<double> probs = Predict(model, data, cache);
  const std::vector<int> labels = data.Labels();
  return {eval::Auroc(probs, labels), eval::Auprc(probs, labels)};
}

TrainResult TrainNonPrivate(ClassifierModel& model, const ClassifierDataset& train, const ClassifierDataset& val,
                            const FitConfig& fit, TokenCache* cache) {
  fit.Validate();
  RequireTrainable(train, val);
  TokenCache local;
  if (cache == nullptr) cache = &local;
  std::vector<nn::Tensor> params = TrainableParams(model);
  nn::Adam optimizer(params, OptimizerConfig(fit));
  const std::string digest = model.FrozenBackbone() ? model.BackboneDigest() : std::string();
  const std::string* digest_ptr = digest.empty() ? nullptr : &digest;
  const std::vector<int> labels = train.Labels();
  const auto batch = static_cast<std::size_t>(fit.batch_size);

  TrainResult result;
  long steps = 0;
  for (int epoch = 0; epoch < fit.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = MakeRng(fit.seed, {kShuffleStream, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<int> variants;
      std::vector<int> batch_labels;
      for (std::size_t r : rows) {
        variants.push_back(DrawVariant(fit.seed, epoch, r, fit.flip_p));
        batch_labels.push_back(labels[r]);
      }
      optimizer.ZeroGrad();
      const nn::Tensor logits = BatchLogits(model, train, rows, variants, cache, digest_ptr);
      nn::Tensor loss = nn::SmoothedCrossEntropy(logits, batch_labels, fit.label_smoothing);
      loss_sum += loss.item() * static_cast<double>(rows.size());
      loss.Backward();
      optimizer.Step();
      ++steps;
    }
    result.records.push_back(MakeRecord(model, params, val, cache, epoch + 1, steps,
                                        loss_sum / static_cast<double>(train.size())));
  }
  optimizer.ZeroGrad();
  return result;
}

TrainResult TrainPrivate(ClassifierModel& model, const ClassifierDataset& train, const ClassifierDataset& val,
                         const FitConfig& fit, const DpOptions& dp, TokenCache* cache) {
  fit.Validate();
  RequireTrainable(train, val);
  if (!dp.budget && !dp.noise_multiplier) {
    throw ConfigError({"private training needs a privacy budget or an explicit noise multiplier"});
  }
  if (dp.budget) dp.budget->Validate();
  if (!(dp.clip_norm > 0.0)) throw ConfigError({"clip_norm must be > 0"});
  if (dp.group_k < 1) throw ConfigError({"group_k must be >= 1"});
  TokenCache local;
  if (cache == nullptr) cache = &local;

  const auto n = static_cast<double>(train.size());
  const double q = std::min(1.0, static_cast<double>(fit.batch_size) / n);
  const std::int64_t steps_per_epoch = std::max<std::int64_t>(1, std::llround(1.0 / q));
  const std::int64_t planned = steps_per_epoch * fit.epochs;
  const double delta = dp.budget ? dp.budget->delta : dp.report_delta;

  DpSummary summary;
  summary.sampling_rate = q;
  summary.clip_norm = dp.clip_norm;
  summary.planned_steps = planned;
  summary.delta = delta;
  summary.sigma = dp.noise_multiplier ? *dp.noise_multiplier : privacy::CalibrateSigma(*dp.budget, q, planned);

  privacy::DpSgdConfig step_config;
  step_config.clip_norm = dp.clip_norm;
  step_config.noise_multiplier = summary.sigma;
  step_config.sampling_rate = q;
  step_config.steps = planned;
  step_config.Validate();

  ClassifierGradients source(model, train, fit, cache);
  TrainResult result;
  long steps = 0;
  auto record = [&](int epoch) {
    CheckpointRecord r = MakeRecord(model, source.params(), val, cache, epoch, steps, source.TakeMeanLoss());
    r.spent_epsilon = summary.ledger.empty() ? 0.0 : privacy::EpsilonAtDelta(summary.ledger, delta).epsilon;
    result.records.push_back(std::move(r));
  };

  for (int epoch = 0; epoch < fit.epochs && !summary.halted_by_budget; ++epoch) {
    source.SetVariants(epoch);
    long epoch_steps = 0;
    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      if (dp.budget) {
        privacy::AccountantLedger probe = summary.ledger;
        probe.Accumulate(q, summary.sigma, 1);
        if (privacy::EpsilonAtDelta(probe, delta).epsilon > dp.budget->epsilon) {
          summary.halted_by_budget = true;
          break;
        }
      }
      Rng poisson = MakeRng(fit.seed, {kPoissonStream, static_cast<std::uint64_t>(steps)});
      const std::vector<std::size_t> batch = privacy::PoissonSample(train.size(), q, poisson);
      Rng noise = MakeRng(fit.seed, {kNoiseStream, static_cast<std::uint64_t>(steps)});
      privacy::DpSgdStep(source, batch, step_config, q * n, summary.ledger, noise);
      ++steps;
      ++epoch_steps;
    }
    if (epoch_steps > 0) record(epoch + 1);
  }
  if (result.records.empty()) record(0);

  summary.taken_steps = summary.ledger.total_steps();
  if (!summary.ledger.empty()) {
    const auto at = privacy::EpsilonAtDelta(summary.ledger, delta);
    summary.spent_epsilon = at.epsilon;
    summary.best_order = at.order;
  }
  if (dp.group_k > 1) {
    summary.patient_level = privacy::GroupPrivacy({summary.spent_epsilon, delta}, dp.group_k);
  }
  result.dp = std::move(summary);
  return result;
}

std::size_t SelectBest(const std::vector<CheckpointRecord>& records, bool lowest) {
  if (records.empty()) throw EmptyInputError("no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double v = records[i].val_auprc;
    const double b = records[best].val_auprc;
    if (lowest ? v < b : v > b) best = i;
  }
  return best;
}

void RestoreCheckpoint(ClassifierModel& model, const CheckpointRecord& record) {
  std::vector<nn::Tensor> params = nn::Parameters(model.TrainableState());
  nn::Unflatten(record.trainable_values, params);
  if (model.Digest() != record.digest) {
    throw ContractViolation("restored classifier does not match checkpoint digest " + record.digest);
  }
}

nlohmann::json StageReport::ToJson() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : result.records) recs.push_back(r.ToJson());
  nlohmann::json j = {{"name", name},
                      {"policy", classify::ToString(policy)},
                      {"n_train", n_train},
                      {"n_synthetic", n_synthetic},
                      {"trainable_params", trainable_params},
                      {"private", private_stage},
                      {"records", recs},
                      {"selected_epoch", result.records.empty() ? 0 : result.records.at(selected).epoch}};
  j["dp"] = result.dp ? result.dp->ToJson() : nlohmann::json(nullptr);
  return j;
}

std::optional<PretrainCache::Entry> PretrainCache::Find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void PretrainCache::Insert(const std::string& key, Entry entry) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.emplace(key, std::move(entry));
}

nlohmann::json RegimeReport::ToJson() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) st.push_back(s.ToJson());
  nlohmann::json ts = nlohmann::json::object();
  for (const auto& [name, s] : tests) ts[name] = {{"auroc", s.auroc}, {"auprc", s.auprc}};
  return {{"regime", RegimeToken(regime.kind)},
          {"label", RegimeLabel(regime.kind)},
          {"budget", RenderBudget(regime.kind, regime.budget, true)},
          {"stages", st},
          {"tests", ts},
          {"final_digest", final_digest}};
}

RegimeReport RunRegime(const TrainRegime& regime, const RegimeData& data, const RunOptions& options,
                       ClassifierModel* final_model) {
  const RegimeKind kind = regime.kind;
  const auto budget = EffectiveBudget(kind, regime.budget);
  if (UsesSyntheticData(kind) && data.syn_train.size() == 0) {
    throw ConfigError({"regime " + RegimeLabel(kind) + " needs a synthetic training set"});
  }
  if (UsesRealData(kind) && data.real_train.size() == 0) {
    throw EmptyInputError("regime " + RegimeLabel(kind) + " needs real training images");
  }
  if (data.syn_train.SyntheticCount() != data.syn_train.size()) {
    throw ContractViolation("synthetic training set contains real images");
  }
  if (data.real_train.SyntheticCount() != 0 || data.real_val.SyntheticCount() != 0) {
    throw ContractViolation("real training or validation set contains synthetic images");
  }
  const FitConfig& fit = options.fit;
  const FitConfig& pre_fit = options.pretrain_fit ? *options.pretrain_fit : options.fit;

  ClassifierModel model = BuildClassifier(options.backbone, options.backbone_weights, fit.seed,
                                          PolicyPrefixes(TrainablePolicy::kHeadOnly));
  RegimeReport report;
  report.regime = {kind, budget, regime.last_layers};

  auto run_stage = [&](const std::string& name, TrainablePolicy policy, const ClassifierDataset& train,
                       const FitConfig& stage_fit, bool private_stage) {
    model.SetTrainable(PolicyPrefixes(policy, regime.last_layers));
    StageReport stage;
    stage.name = name;
    stage.policy = policy;
    stage.n_train = train.size();
    stage.n_synthetic = train.SyntheticCount();
    stage.trainable_params = model.TrainableCount();
    stage.private_stage = private_stage;
    if (stage.trainable_params != ExpectedTrainable(model, policy, regime.last_layers)) {
      throw ContractViolation("trainable parameter set of stage " + name + " does not match its policy");
    }
    if (private_stage) {
      DpOptions dp = options.dp;
      dp.budget = budget;
      stage.result = TrainPrivate(model, train, data.real_val, stage_fit, dp, options.cache);
    } else {
      stage.result = TrainNonPrivate(model, train, data.real_val, stage_fit, options.cache);
    }
    stage.selected = SelectBest(stage.result.records, stage_fit.select_lowest_auprc);
    RestoreCheckpoint(model, stage.result.records[stage.selected]);
    return stage;
  };

  auto pretrain = [&]() {
    std::string keys;
    for (const auto& k : data.syn_train.keys) keys += k + ",";
    const std::string key = Sha256Hex(model.Digest() + "|" + pre_fit.ToJson().dump() + "|" +
                                      options.backbone.ToJson().dump() + "|" + keys);
    if (options.pretrain_cache) {
      if (auto hit = options.pretrain_cache->Find(key)) {
        nn::StateList state = model.State();
        nn::LoadState(hit->state, state);
        report.stages.push_back(hit->report);
        return;
      }
    }
    StageReport stage = run_stage("synpre", TrainablePolicy::kAllParams, data.syn_train, pre_fit, false);
    if (options.pretrain_cache) {
      PretrainCache::Entry entry;
      nn::StoreState(model.State(), entry.state);
      entry.report = stage;
      options.pretrain_cache->Insert(key, std::move(entry));
    }
    report.stages.push_back(std::move(stage));
  };

  switch (kind) {
    case RegimeKind::kReal:
      report.stages.push_back(run_stage("real", TrainablePolicy::kHeadOnly, data.real_train, fit, budget.has_value()));
      break;
    case RegimeKind::kSyn:
      report.stages.push_back(run_stage("syn", TrainablePolicy::kHeadOnly, data.syn_train, fit, false));
      break;
    case RegimeKind::kRealPlusSyn:
      report.stages.push_back(run_stage("real+syn", TrainablePolicy::kHeadOnly,
                                        data.real_train.Concat(data.syn_train), fit, budget.has_value()));
      break;
    case RegimeKind::kSynPre:
      pretrain();
      break;
    case RegimeKind::kSynPreThenRealFT:
      pretrain();
      report.stages.push_back(
          run_stage("realft", TrainablePolicy::kLastTwoLayers, data.real_train, fit, budget.has_value()));
      break;
  }

  // Scoring never needs backbone gradients; head-only keeps tokens cacheable.
  model.SetTrainable(PolicyPrefixes(TrainablePolicy::kHeadOnly));
  for (const auto& [name, test] : data.tests) report.tests.emplace_back(name, ScoreDataset(model, test, options.cache));
  report.final_digest = model.Digest();
  if (final_model) *final_model = std::move(model);
  return report;
}

}  // namespace mammodp::classify
