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

#include <map>

#include "commands.hpp"
#include "mammodp/common/container.hpp"
#include "mammodp/common/errors.hpp"
#include "mammodp/eval/metrics.hpp"
#include "mammodp/experiment/reproduce.hpp"
#include "mammodp/fixture/fixture.hpp"
#include "mammodp/gan/train.hpp"
#include "mammodp/ingest/pipeline.hpp"

namespace mammodp::tools {
namespace {

nlohmann::json SplitCounts(const std::vector<ingest::Split>& splits) {
  std::map<std::string, int> counts = {{"train", 0}, {"val", 0}, {"test", 0}};
  for (auto s : splits) ++counts[ingest::ToString(s)];
  return counts;
}

}  // namespace

void AddIngest(CLI::App& app, const GlobalOptions& g, Action& action) {
  struct Opts {
    std::string images, annotations;
    double val_fraction = 0.15;
    int margin = ingest::kDefaultMarginPx;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("ingest", "Extract square mass patches and a per-patient split");
  cmd->add_option("--images", o->images, "Directory of full-field images")->required();
  cmd->add_option("--annotations", o->annotations, "Annotation CSV")->required();
  cmd->add_option("--val-fraction", o->val_fraction, "Fraction of non-test patients held out for validation");
  cmd->add_option("--margin", o->margin, "Context margin in pixels around the lesion box");
  cmd->callback([&g, &action, o] {
    action = [&g, o] {
      ingest::IngestOptions opts;
      opts.images_dir = o->images;
      opts.annotations = o->annotations;
      opts.out_dir = RequireOut(g);
      opts.val_fraction = o->val_fraction;
      opts.seed = SeedOr(g, 0);
      opts.margin_px = o->margin;
      const auto result = ingest::IngestDataset(opts);
      nlohmann::json rejected = nlohmann::json::array();
      for (const auto& r : result.rejected) rejected.push_back({{"image_id", r.image_id}, {"reason", r.reason}});
      PrintJson({{"manifest", (opts.out_dir / "manifest.csv").string()},
                 {"patches", result.manifest.size()},
                 {"splits", SplitCounts(result.manifest.splits)},
                 {"rejected", rejected}});
      return kExitOk;
    };
  });
}

void AddMakeFixture(CLI::App& app, const GlobalOptions& g, Action& action) {
  struct Opts {
    std::string kind = "patches";
    int patients = 16;
    int canvas = 320;
    double val_fraction = 0.2;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("make-fixture", "Write a procedural dataset for smoke tests");
  cmd->add_option("--kind", o->kind, "patches, external or raw")
      ->check(CLI::IsMember({"patches", "external", "raw"}));
  cmd->add_option("--patients", o->patients, "Number of patients")->check(CLI::PositiveNumber);
  cmd->add_option("--canvas", o->canvas, "Canvas size of raw images");
  cmd->add_option("--val-fraction", o->val_fraction, "Validation fraction for the patch split");
  cmd->callback([&g, &action, o] {
    action = [&g, o] {
      const std::filesystem::path out = RequireOut(g);
      fixture::FixtureSpec spec;
      spec.n_patients = o->patients;
      spec.seed = SeedOr(g, spec.seed);
      if (o->kind == "raw") {
        const auto fx = fixture::WriteMammogramFixture(out, spec, o->canvas);
        PrintJson({{"images", fx.images_dir.string()}, {"annotations", fx.annotations.string()}});
        return kExitOk;
      }
      std::vector<ingest::Split> splits;
      if (o->kind == "external") {
        spec.external_domain = true;
        spec.patient_prefix = "X";
      }
      const auto patches = fixture::GeneratePatches(spec);
      splits = o->kind == "external" ? std::vector<ingest::Split>(patches.size(), ingest::Split::kTest)
                                     : experiment::SplitFixture(patches, o->val_fraction, spec.seed);
      ingest::WritePatchArchive(out, patches, splits);
      PrintJson({{"manifest", (out / "manifest.csv").string()},
                 {"patches", patches.size()},
                 {"splits", SplitCounts(splits)}});
      return kExitOk;
    };
  });
}

void AddTrainGan(CLI::App& app, const GlobalOptions& g, Action& action) {
  struct Opts {
    std::string manifest;
    std::optional<int> epochs;
    std::optional<long> max_steps;
    std::optional<int> batch_size;
    std::optional<int> base_width;
    int checkpoint_every = 0;
    bool select = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train-gan", "Train the malignancy-conditioned GAN on the training split");
  cmd->add_option("--manifest", o->manifest, "Patch archive manifest")->required();
  cmd->add_option("--epochs", o->epochs, "Training epochs");
  cmd->add_option("--max-steps", o->max_steps, "Optional cap on optimizer steps");
  cmd->add_option("--batch-size", o->batch_size, "Batch size");
  cmd->add_option("--base-width", o->base_width, "Channel width multiplier");
  cmd->add_option("--checkpoint-every", o->checkpoint_every, "Checkpoint interval in epochs (0: final only)");
  cmd->add_flag("--select", o->select, "Pick the checkpoint with the lowest FID against the validation split");
  cmd->callback([&g, &action, o] {
    action = [&g, o] {
      const auto cfg = OptionalConfig(g);
      gan::GanTrainConfig tc = cfg ? cfg->gan.train : gan::GanTrainConfig{};
      tc.seed = cfg ? cfg->seed : SeedOr(g, 0);
      if (o->epochs) tc.epochs = *o->epochs;
      if (o->max_steps) tc.max_steps = *o->max_steps;
      if (o->batch_size) tc.batch_size = *o->batch_size;
      if (o->base_width) tc.arch.base_width = *o->base_width;
      tc.checkpoint_every = o->checkpoint_every;
      tc.Validate();
      const std::filesystem::path out = RequireOut(g);
      const auto train = ingest::LoadPatches(o->manifest, ingest::Split::kTrain);
      auto result = gan::TrainMcgan(tc, train, out);
      nlohmann::json epochs = nlohmann::json::array();
      for (const auto& e : result.epochs) {
        epochs.push_back({{"epoch", e.epoch}, {"d_loss", e.d_loss}, {"g_loss", e.g_loss}, {"steps", e.steps}});
      }
      nlohmann::json ckpts = nlohmann::json::array();
      for (const auto& c : result.checkpoints) {
        ckpts.push_back({{"epoch", c.epoch}, {"step", c.step}, {"digest", c.digest}, {"path", c.path.string()}});
      }
      nlohmann::json report = {{"config", tc.ToJson()},
                               {"steps", result.steps.size()},
                               {"epochs", epochs},
                               {"checkpoints", ckpts},
                               {"warnings", result.warnings}};
      if (o->select) {
        const auto val = ingest::LoadPatches(o->manifest, ingest::Split::kVal);
        if (val.empty()) throw ConfigError({"--select needs a validation split in the manifest"});
        std::vector<double> scores;
        const auto metric = eval::MakeSetMetric("fid", "img-surrogate");
        const std::size_t best = gan::SelectGanCheckpoint(result.checkpoints, val, metric, tc.seed, &scores);
        report["selection"] = {{"metric", "fid"},
                               {"scores", scores},
                               {"selected", result.checkpoints[best].path.string()}};
      }
      PrintJson(report);
      return kExitOk;
    };
  });
}

void AddSampleSyn(CLI::App& app, const GlobalOptions& g, Action& action) {
  struct Opts {
    std::string checkpoint;
    int n_benign = 0;
    int n_malignant = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("sample-syn", "Sample a labeled synthetic patch archive from a generator");
  cmd->add_option("--checkpoint", o->checkpoint, "GAN checkpoint")->required()->check(CLI::ExistingFile);
  cmd->add_option("--n-benign", o->n_benign, "Benign samples")->required()->check(CLI::NonNegativeNumber);
  cmd->add_option("--n-malignant", o->n_malignant, "Malignant samples")->required()->check(CLI::NonNegativeNumber);
  cmd->callback([&g, &action, o] {
    action = [&g, o] {
      const std::filesystem::path out = RequireOut(g);
      gan::GanModel model = gan::LoadGanModel(BlobContainer::Load(o->checkpoint));
      const auto syn = gan::SampleSyntheticDataset(model, o->n_benign, o->n_malignant, SeedOr(g, 0));
      ingest::WritePatchArchive(out, syn, std::vector<ingest::Split>(syn.size(), ingest::Split::kTrain));
      PrintJson({{"manifest", (out / "manifest.csv").string()},
                 {"n_benign", o->n_benign},
                 {"n_malignant", o->n_malignant},
                 {"generator", model.Digest()}});
      return kExitOk;
    };
  });
}

}  // namespace mammodp::tools
