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

#include "commands.hpp"
#include "mammodp/classify/train.hpp"
#include "mammodp/common/container.hpp"
#include "mammodp/common/errors.hpp"
#include "mammodp/common/files.hpp"
#include "mammodp/ingest/pipeline.hpp"
#include "mammodp/nn/layers.hpp"
#include "mammodp/privacy/accountant.hpp"

namespace mammodp::tools {
namespace {

std::optional<privacy::PrivacyBudget> BudgetFromFlag(const std::string& epsilon, double delta) {
  const auto parsed = experiment::ParseEpsilonList(epsilon);
  if (parsed.size() != 1) throw ConfigError({"--epsilon takes one value"});
  if (!parsed[0]) return std::nullopt;
  return privacy::PrivacyBudget::Make(*parsed[0], delta);
}

}  // namespace

void AddTrainClf(CLI::App& app, const GlobalOptions& g, Action& action) {
  struct Opts {
    std::string regime;
    std::string manifest, syn_manifest, external_manifest;
    std::string epsilon = "inf";
    double delta = 1e-4;
    std::optional<int> epochs, pretrain_epochs, batch_size;
    std::optional<double> lr, clip_norm;
    int group_k = 1;
    bool select_lowest = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train-clf", "Train the malignancy classifier under one regime");
  cmd->add_option("--regime", o->regime, "real, syn, synpre, real+syn or synpre+realft")->required();
  cmd->add_option("--manifest", o->manifest, "Real patch archive with train/val/test splits")->required();
  cmd->add_option("--syn-manifest", o->syn_manifest, "Synthetic patch archive");
  cmd->add_option("--external-manifest", o->external_manifest, "Out-of-domain test archive");
  cmd->add_option("--epsilon", o->epsilon, "Privacy budget epsilon, or inf");
  cmd->add_option("--delta", o->delta, "Privacy budget delta");
  cmd->add_option("--epochs", o->epochs, "Training epochs");
  cmd->add_option("--pretrain-epochs", o->pretrain_epochs, "Epochs of synthetic pretraining");
  cmd->add_option("--batch-size", o->batch_size, "Logical batch size");
  cmd->add_option("--lr", o->lr, "Learning rate");
  cmd->add_option("--clip-norm", o->clip_norm, "Per-sample clipping norm");
  cmd->add_option("--group-k", o->group_k, "Images per patient for a patient-level guarantee");
  cmd->add_flag("--select-lowest-auprc", o->select_lowest, "Select the checkpoint with the lowest validation AUPRC");
  cmd->callback([&g, &action, o] {
    action = [&g, o] {
      const auto cfg = OptionalConfig(g);
      const std::filesystem::path out = RequireOut(g);
      const auto kind = classify::ParseRegime(o->regime);
      if (classify::UsesSyntheticData(kind) && o->syn_manifest.empty()) {
        throw ConfigError({"regime " + classify::RegimeLabel(kind) + " needs --syn-manifest"});
      }
      const std::uint64_t seed = cfg ? cfg->seed : SeedOr(g, 0);
      classify::RunOptions ro;
      if (cfg) {
        ro.backbone = cfg->classify.backbone;
        ro.fit = cfg->classify.fit;
        ro.pretrain_fit = cfg->classify.pretrain_fit;
        ro.dp.clip_norm = cfg->privacy.clip_norm;
      } else {
        ro.pretrain_fit = ro.fit;
      }
      if (o->epochs) ro.fit.epochs = *o->epochs;
      if (o->batch_size) ro.fit.batch_size = *o->batch_size;
      if (o->lr) ro.fit.lr = *o->lr;
      if (o->pretrain_epochs) ro.pretrain_fit->epochs = *o->pretrain_epochs;
      if (o->clip_norm) ro.dp.clip_norm = *o->clip_norm;
      ro.fit.select_lowest_auprc = ro.fit.select_lowest_auprc || o->select_lowest;
      ro.pretrain_fit->select_lowest_auprc = ro.fit.select_lowest_auprc;
      ro.fit.seed = seed;
      ro.pretrain_fit->seed = seed;
      ro.dp.group_k = o->group_k;
      ro.dp.report_delta = o->delta;
      classify::TokenCache cache;
      ro.cache = &cache;

      classify::RegimeData data;
      data.real_train = classify::ClassifierDataset::From(ingest::LoadPatches(o->manifest, ingest::Split::kTrain));
      data.real_val = classify::ClassifierDataset::From(ingest::LoadPatches(o->manifest, ingest::Split::kVal));
      if (!o->syn_manifest.empty()) {
        data.syn_train = classify::ClassifierDataset::From(ingest::LoadPatches(o->syn_manifest));
      }
      data.tests.emplace_back("internal",
                              classify::ClassifierDataset::From(ingest::LoadPatches(o->manifest, ingest::Split::kTest)));
      if (!o->external_manifest.empty()) {
        data.tests.emplace_back("external", classify::ClassifierDataset::From(ingest::LoadPatches(o->external_manifest)));
      }

      classify::TrainRegime regime{kind, BudgetFromFlag(o->epsilon, o->delta)};
      classify::ClassifierModel model;
      const auto report = classify::RunRegime(regime, data, ro, &model);
      nlohmann::json j = report.ToJson();
      j["budget_display"] = classify::RenderBudget(kind, regime.budget, false);
      const auto& last = report.stages.back();
      j["selected_epoch"] = last.result.records.at(last.selected).epoch;
      j["spent_epsilon"] = last.result.dp ? nlohmann::json(last.result.dp->spent_epsilon) : nlohmann::json(nullptr);

      BlobContainer ckpt;
      nn::StoreState(model.State(), ckpt);
      ckpt.metadata = {{"kind", "classifier"},
                       {"backbone", model.backbone_config().ToJson()},
                       {"regime", classify::RegimeToken(kind)},
                       {"fit", ro.fit.ToJson()},
                       {"digest", report.final_digest}};
      if (last.result.dp) ckpt.metadata["dp"] = last.result.dp->ToJson();
      std::filesystem::create_directories(out);
      ckpt.Save(out / "classifier.ckpt");
      WriteFileAtomic(out / "report.json", j.dump(2) + "\n");
      PrintJson(j);
      return kExitOk;
    };
  });
}

void AddAccountant(CLI::App& app, const GlobalOptions&, Action& action) {
  struct Opts {
    std::optional<double> q, sigma, epsilon;
    std::optional<long> steps;
    double delta = 1e-5;
    int group_k = 1;
  };
  auto o = std::make_shared<Opts>();
  auto c = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("accountant", "Privacy spent by the subsampled Gaussian mechanism");
  cmd->add_option("--q", o->q, "Poisson sampling rate");
  cmd->add_option("--sigma", o->sigma, "Noise multiplier");
  cmd->add_option("--steps", o->steps, "Number of steps");
  cmd->add_option("--delta", o->delta, "Target delta");
  cmd->add_option("--group-k", o->group_k, "Images per patient for a patient-level guarantee");
  auto* cal = cmd->add_subcommand("calibrate", "Noise multiplier for a target budget");
  cal->add_option("--epsilon", c->epsilon, "Target epsilon")->required();
  cal->add_option("--delta", c->delta, "Target delta");
  cal->add_option("--q", c->q, "Poisson sampling rate")->required();
  cal->add_option("--steps", c->steps, "Number of steps")->required();

  cmd->callback([&action, o, c, cal] {
    if (cal->parsed()) {
      action = [c] {
        const auto target = privacy::PrivacyBudget::Make(*c->epsilon, c->delta);
        const double sigma = privacy::CalibrateSigma(target, *c->q, *c->steps);
        privacy::AccountantLedger ledger;
        ledger.Accumulate(*c->q, sigma, *c->steps);
        const auto at = privacy::EpsilonAtDelta(ledger, c->delta);
        PrintJson({{"sigma", sigma},
                   {"epsilon", at.epsilon},
                   {"order", at.order},
                   {"target_epsilon", *c->epsilon},
                   {"delta", c->delta},
                   {"q", *c->q},
                   {"steps", *c->steps}});
        return kExitOk;
      };
      return;
    }
    action = [o] {
      std::vector<std::string> missing;
      if (!o->q) missing.push_back("--q is required");
      if (!o->sigma) missing.push_back("--sigma is required");
      if (!o->steps) missing.push_back("--steps is required");
      if (!missing.empty()) throw ConfigError(missing);
      if (!(*o->q > 0.0 && *o->q <= 1.0)) throw ConfigError({"--q must be in (0, 1]"});
      if (!(*o->sigma > 0.0)) throw ConfigError({"--sigma must be > 0"});
      if (*o->steps < 0) throw ConfigError({"--steps must be >= 0"});
      if (!(o->delta > 0.0 && o->delta < 1.0)) throw ConfigError({"--delta must be in (0, 1)"});
      privacy::AccountantLedger ledger;
      ledger.Accumulate(*o->q, *o->sigma, *o->steps);
      const auto at = privacy::EpsilonAtDelta(ledger, o->delta);
      nlohmann::json j = {{"epsilon", at.epsilon}, {"order", at.order}, {"delta", o->delta},
                          {"q", *o->q},          {"sigma", *o->sigma}, {"steps", *o->steps}};
      if (o->group_k > 1) {
        const auto patient = privacy::GroupPrivacy({at.epsilon, o->delta}, o->group_k);
        j["patient_level"] = {{"k", o->group_k}, {"epsilon", patient.epsilon}, {"delta", patient.delta},
                              {"vacuous", patient.delta >= 1.0}};
      }
      PrintJson(j);
      return kExitOk;
    };
  });
}

}  // namespace mammodp::tools
