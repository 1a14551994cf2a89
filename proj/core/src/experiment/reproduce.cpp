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

#include "mammodp/experiment/reproduce.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mammodp/common/container.hpp"
#include "mammodp/common/errors.hpp"
#include "mammodp/common/files.hpp"
#include "mammodp/common/hash.hpp"
#include "mammodp/common/image.hpp"
#include "mammodp/common/resample.hpp"
#include "mammodp/eval/metrics.hpp"
#include "mammodp/eval/protocol.hpp"
#include "mammodp/fixture/fixture.hpp"
#include "mammodp/gan/train.hpp"
#include "mammodp/ingest/manifest.hpp"
#include "mammodp/ingest/pipeline.hpp"

namespace mammodp::experiment {
namespace {

using classify::ClassifierDataset;
using classify::RegimeKind;
using ingest::MassPatch;
using ingest::Split;

std::string SetDigest(const std::vector<std::string>& keys) {
  std::string joined;
  for (const auto& k : keys) joined += k + "\n";
  return Sha256Hex(joined);
}

std::string SetDigest(const std::vector<MassPatch>& patches) {
  std::vector<std::string> keys;
  keys.reserve(patches.size());
  for (const auto& p : patches) keys.push_back(Sha256Hex(std::span<const double>(p.pixels.pixels)) + "/" +
                                               std::to_string(p.pixels.width));
  return SetDigest(keys);
}

void RequireBothClasses(const std::vector<MassPatch>& set, const std::string& name) {
  bool has[2] = {false, false};
  for (const auto& p : set) has[ingest::LabelIndex(p.label)] = true;
  if (!has[0] || !has[1]) {
    throw ConfigError({"the " + name + " split has " + std::to_string(set.size()) +
                       " patches but lacks a benign or malignant case; change val_fraction, the seed or the data"});
  }
}

void LoadRealFixture(const ExperimentConfig& config, ExperimentData& d) {
  fixture::FixtureSpec spec;
  spec.n_patients = config.ingest.fixture_patients;
  spec.seed = config.ingest.fixture_seed;
  std::vector<MassPatch> patches = fixture::GeneratePatches(spec);
  const auto splits = SplitFixture(patches, config.ingest.val_fraction, config.seed);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    switch (splits[i]) {
      case Split::kTrain: d.train.push_back(patches[i]); break;
      case Split::kVal: d.val.push_back(patches[i]); break;
      case Split::kTest: d.test.push_back(patches[i]); break;
    }
  }
  if (config.ingest.fixture_external_patients > 0) {
    fixture::FixtureSpec ext = spec;
    ext.n_patients = config.ingest.fixture_external_patients;
    ext.seed = spec.seed + 1;
    ext.external_domain = true;
    ext.patient_prefix = "X";
    d.external = fixture::GeneratePatches(ext);
  }
}

void LoadFromManifest(const std::filesystem::path& manifest, ExperimentData& d) {
  d.train = ingest::LoadPatches(manifest, Split::kTrain);
  d.val = ingest::LoadPatches(manifest, Split::kVal);
  d.test = ingest::LoadPatches(manifest, Split::kTest);
}

std::vector<MassPatch> SynthesizeCached(const ExperimentConfig& config, const std::vector<MassPatch>& train,
                                        std::vector<std::string>& notes) {
  gan::GanTrainConfig gc = config.gan.train;
  gc.seed = config.seed;
  const nlohmann::json identity = {{"train", SetDigest(train)},
                                   {"gan", gc.ToJson()},
                                   {"n_benign", config.gan.n_benign},
                                   {"n_malignant", config.gan.n_malignant}};
  const std::string hash = Sha256Hex(identity.dump()).substr(0, 16);
  const auto dir = config.out / "synthetic" / hash;
  const auto manifest = dir / "manifest.csv";
  if (std::filesystem::exists(manifest)) {
    notes.push_back("reused synthetic set " + dir.string());
    return ingest::LoadPatches(manifest);
  }
  auto result = gan::TrainMcgan(gc, train, dir / "gan");
  for (const auto& w : result.warnings) notes.push_back("gan: " + w);
  auto syn = gan::SampleSyntheticDataset(result.model, config.gan.n_benign, config.gan.n_malignant, config.seed);
  ingest::WritePatchArchive(dir, syn, std::vector<Split>(syn.size(), Split::kTrain));
  WriteFileAtomic(dir / "identity.json", identity.dump(2) + "\n");
  notes.push_back("trained generator for " + std::to_string(result.steps.size()) + " steps; synthetic set " +
                  dir.string());
  // The archive is quantized; later invocations see these exact pixels.
  return ingest::LoadPatches(manifest);
}

std::string BudgetMachine(RegimeKind kind, const std::optional<privacy::PrivacyBudget>& b) {
  return classify::RenderBudget(kind, b, true);
}

std::string ColumnLabel(const std::optional<privacy::PrivacyBudget>& b, bool machine) {
  if (!b) return machine ? "inf" : "∞";
  return classify::FormatEpsilon(b->epsilon);
}

std::string Fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

nlohmann::json RunMetrics(const classify::RegimeReport& report) {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [name, s] : report.tests) m[name] = {{"auroc", s.auroc}, {"auprc", s.auprc}};
  const auto& last = report.stages.back();
  m["selected_epoch"] = last.result.records.at(last.selected).epoch;
  m["spent_epsilon"] = last.result.dp ? nlohmann::json(last.result.dp->spent_epsilon) : nlohmann::json(nullptr);
  return m;
}

std::vector<eval::ProvenancedImage> ToProvenanced(const std::vector<MassPatch>& patches) {
  std::vector<eval::ProvenancedImage> out;
  out.reserve(patches.size());
  for (const auto& p : patches) {
    out.push_back({p.pixels, p.provenance.image_id, p.synthetic ? std::string() : p.provenance.patient_id,
                   ingest::LabelIndex(p.label), p.synthetic});
  }
  return out;
}

std::size_t Capacity(const std::vector<eval::ProvenancedImage>& set) {
  if (set.empty() || set.front().synthetic) return set.size();
  std::set<std::string> patients;
  for (const auto& s : set) patients.insert(s.patient_id);
  return patients.size();
}

void WriteGrid(const std::filesystem::path& path, const std::vector<MassPatch>& synthetic) {
  constexpr int kTile = 128;
  constexpr int kGap = 2;
  constexpr int kPerRow = 8;
  std::vector<const MassPatch*> rows[2];
  for (const auto& p : synthetic) {
    auto& row = rows[ingest::LabelIndex(p.label)];
    if (row.size() < kPerRow) row.push_back(&p);
  }
  const int cols = static_cast<int>(std::max<std::size_t>({rows[0].size(), rows[1].size(), 1}));
  GrayImage grid(cols * (kTile + kGap) + kGap, 2 * (kTile + kGap) + kGap, 1.0);
  for (int r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const GrayImage tile = Resample(rows[r][c]->pixels, kTile, kTile);
      const int x0 = kGap + static_cast<int>(c) * (kTile + kGap);
      const int y0 = kGap + r * (kTile + kGap);
      for (int y = 0; y < kTile; ++y) {
        for (int x = 0; x < kTile; ++x) grid.at(x0 + x, y0 + y) = std::clamp(tile.at(x, y), 0.0, 1.0);
      }
    }
  }
  WritePng8(path, grid);
}

}  // namespace

std::vector<Split> SplitFixture(const std::vector<MassPatch>& patches, double val_fraction, std::uint64_t seed) {
  std::set<std::string> ids;
  for (const auto& p : patches) ids.insert(p.provenance.patient_id);
  const std::vector<std::string> sorted(ids.begin(), ids.end());
  std::set<std::string> test_ids;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i % 5 == 4) test_ids.insert(sorted[i]);
  }
  std::vector<ingest::LesionRecord> records;
  for (const auto& p : patches) {
    records.push_back(p.provenance);
    if (test_ids.count(p.provenance.patient_id)) records.back().predefined_split = Split::kTest;
  }
  return ingest::SplitPerPatient(std::move(records), val_fraction, seed).splits;
}

ExperimentData PrepareData(const ExperimentConfig& config, bool need_synthetic) {
  ExperimentData d;
  switch (config.ingest.source) {
    case DataSource::kFixture:
      LoadRealFixture(config, d);
      break;
    case DataSource::kManifest:
      LoadFromManifest(config.ingest.manifest, d);
      break;
    case DataSource::kRaw: {
      ingest::IngestOptions opts;
      opts.images_dir = config.ingest.images;
      opts.annotations = config.ingest.annotations;
      opts.out_dir = config.out / "ingest";
      opts.val_fraction = config.ingest.val_fraction;
      opts.seed = config.seed;
      opts.margin_px = config.ingest.margin_px;
      const auto result = ingest::IngestDataset(opts);
      for (const auto& r : result.rejected) d.notes.push_back("ingest skipped " + r.image_id + ": " + r.reason);
      LoadFromManifest(opts.out_dir / "manifest.csv", d);
      break;
    }
  }
  if (!config.ingest.external_manifest.empty()) d.external = ingest::LoadPatches(config.ingest.external_manifest);
  if (d.train.empty()) throw ConfigError({"the training split is empty"});
  RequireBothClasses(d.val, "validation");
  RequireBothClasses(d.test, "test");
  if (!d.external.empty()) RequireBothClasses(d.external, "external");
  for (const auto* set : {&d.train, &d.val, &d.test, &d.external}) {
    for (const auto& p : *set) {
      if (p.synthetic) throw ContractViolation("real split contains synthetic patch " + p.provenance.image_id);
    }
  }
  if (!need_synthetic) return d;

  if (!config.gan.syn_manifest.empty()) {
    d.synthetic = ingest::LoadPatches(config.gan.syn_manifest);
    for (const auto& p : d.synthetic) {
      if (!p.synthetic) throw ContractViolation("synthetic manifest lists real patch " + p.provenance.image_id);
    }
    d.notes.push_back("synthetic set from " + config.gan.syn_manifest.string());
  } else if (!config.gan.checkpoint.empty()) {
    gan::GanModel model = gan::LoadGanModel(BlobContainer::Load(config.gan.checkpoint));
    d.synthetic = gan::SampleSyntheticDataset(model, config.gan.n_benign, config.gan.n_malignant, config.seed);
    d.notes.push_back("synthetic set sampled from " + config.gan.checkpoint.string());
  } else if (config.gan.synthesize) {
    d.synthetic = SynthesizeCached(config, d.train, d.notes);
  }
  if (d.synthetic.empty()) throw ConfigError({"a synthetic set is required but none is configured"});
  return d;
}

std::string RunId(const ExperimentConfig& config, const PlannedRun& run, const classify::RegimeData& data) {
  const RegimeKind kind = run.cell.regime;
  const auto budget = classify::EffectiveBudget(kind, run.cell.budget);
  classify::FitConfig fit = config.classify.fit;
  fit.seed = run.seed;
  nlohmann::json id = {{"regime", classify::RegimeToken(kind)},
                       {"budget", BudgetMachine(kind, budget)},
                       {"seed", run.seed},
                       {"fit", fit.ToJson()},
                       {"backbone", config.classify.backbone.ToJson()},
                       {"val", SetDigest(data.real_val.keys)}};
  if (!config.classify.backbone_weights.empty()) {
    id["backbone_weights"] = Sha256File(config.classify.backbone_weights);
  }
  if (budget) {
    id["delta"] = budget->delta;
    id["clip_norm"] = config.privacy.clip_norm;
    id["group_k"] = config.privacy.group_k;
  }
  if (classify::UsesRealData(kind)) id["train"] = SetDigest(data.real_train.keys);
  if (classify::UsesSyntheticData(kind)) id["syn"] = SetDigest(data.syn_train.keys);
  if (kind == RegimeKind::kSynPre || kind == RegimeKind::kSynPreThenRealFT) {
    classify::FitConfig pre = config.classify.pretrain_fit;
    pre.seed = run.seed;
    id["pretrain_fit"] = pre.ToJson();
  }
  if (kind == RegimeKind::kSynPreThenRealFT) id["last_layers"] = config.classify.last_layers;
  nlohmann::json tests = nlohmann::json::object();
  for (const auto& [name, set] : data.tests) tests[name] = SetDigest(set.keys);
  id["tests"] = tests;
  return Sha256Hex(id.dump());
}

ReproduceSummary ReproduceTable(const ExperimentConfig& config, const ReproduceOptions& options) {
  const ExperimentData prepared = PrepareData(config, config.NeedsSynthetic());
  classify::RegimeData data;
  data.real_train = ClassifierDataset::From(prepared.train);
  data.real_val = ClassifierDataset::From(prepared.val);
  if (!prepared.synthetic.empty()) data.syn_train = ClassifierDataset::From(prepared.synthetic);
  data.tests.emplace_back(kInternalTest, ClassifierDataset::From(prepared.test));
  if (!prepared.external.empty()) data.tests.emplace_back(kExternalTest, ClassifierDataset::From(prepared.external));
  const std::string input_hash =
      Sha256Hex(SetDigest(data.real_train.keys) + SetDigest(data.real_val.keys) + SetDigest(data.syn_train.keys));

  std::optional<BlobContainer> weights;
  if (!config.classify.backbone_weights.empty()) weights = BlobContainer::Load(config.classify.backbone_weights);

  const RunStore store(config.out);
  const auto plan = PlanRuns(config);
  ReproduceSummary summary;
  summary.planned_runs = plan.size();

  // Merge runs that resolve to the same inputs (privacy-exempt regimes under
  // a finite budget column run exactly once).
  std::vector<std::string> plan_ids;
  std::vector<std::size_t> unique_plan;  // index into plan per unique id
  std::map<std::string, std::size_t> unique_index;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const std::string id = RunId(config, plan[i], data);
    plan_ids.push_back(id);
    if (unique_index.emplace(id, unique_plan.size()).second) unique_plan.push_back(i);
  }
  summary.unique_runs = unique_plan.size();

  std::map<std::string, RunRecord> done;
  std::map<std::string, std::string> failures;
  std::vector<std::size_t> pending;
  for (std::size_t u = 0; u < unique_plan.size(); ++u) {
    const std::string& id = plan_ids[unique_plan[u]];
    if (auto rec = store.Find(id)) {
      done.emplace(id, std::move(*rec));
      ++summary.reused;
    } else {
      pending.push_back(unique_plan[u]);
    }
  }

  classify::TokenCache token_cache;
  classify::PretrainCache pretrain_cache;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const PlannedRun& run = plan[pending[k]];
      const std::string& id = plan_ids[pending[k]];
      const RegimeKind kind = run.cell.regime;
      const auto budget = classify::EffectiveBudget(kind, run.cell.budget);
      const std::string label = classify::RegimeLabel(kind) + " eps=" + classify::RenderBudget(kind, budget, false) +
                                " seed=" + std::to_string(run.seed);
      const auto t0 = std::chrono::steady_clock::now();
      RunRecord rec;
      rec.run_id = id;
      rec.config_digest = config.digest;
      rec.input_hash = input_hash;
      rec.regime = classify::RegimeLabel(kind);
      rec.budget = BudgetMachine(kind, budget);
      rec.seed = run.seed;
      rec.started = TimestampNow();
      try {
        if (options.before_run) options.before_run(run);
        classify::RunOptions ro;
        ro.backbone = config.classify.backbone;
        ro.backbone_weights = weights ? &*weights : nullptr;
        ro.fit = config.classify.fit;
        ro.fit.seed = run.seed;
        ro.pretrain_fit = config.classify.pretrain_fit;
        ro.pretrain_fit->seed = run.seed;
        ro.dp.clip_norm = config.privacy.clip_norm;
        ro.dp.report_delta = config.privacy.delta;
        ro.dp.group_k = config.privacy.group_k;
        ro.cache = &token_cache;
        ro.pretrain_cache = &pretrain_cache;
        classify::TrainRegime regime{kind, run.cell.budget, config.classify.last_layers};
        const auto report = classify::RunRegime(regime, data, ro);
        rec.finished = TimestampNow();
        rec.metrics = RunMetrics(report);
        rec.report = report.ToJson();
        rec.artifacts = {(config.out / "runs" / (id + ".json")).string()};
        store.Write(rec);
        store.ClearQuarantine(id);
        std::lock_guard<std::mutex> lock(mu);
        ++summary.executed;
        done.emplace(id, rec);
        if (options.verbose) {
          const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          std::clog << "[reproduce] " << label << " done in " << Fixed(secs, 1) << "s\n";
        }
      } catch (const std::exception& e) {
        nlohmann::json failure = {{"run_id", id},
                                  {"regime", rec.regime},
                                  {"budget", rec.budget},
                                  {"seed", run.seed},
                                  {"config_digest", config.digest},
                                  {"started", rec.started},
                                  {"failed", TimestampNow()},
                                  {"error", e.what()}};
        try {
          store.Quarantine(id, failure);
        } catch (const std::exception&) {
        }
        std::lock_guard<std::mutex> lock(mu);
        ++summary.failed;
        failures.emplace(id, e.what());
        if (options.verbose) std::clog << "[reproduce] " << label << " FAILED: " << e.what() << "\n";
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(std::max<std::size_t>(pending.size(), 1))));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  // Aggregate over seeds per cell.
  std::vector<std::string> test_names;
  for (const auto& [name, set] : data.tests) test_names.push_back(name);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "regime,budget,column,test,seeds,auroc_mean,auroc_std,auprc_mean,auprc_std\n";
  std::map<std::string, std::vector<std::string>> md_lines;
  for (auto kind : config.classify.regimes) {
    nlohmann::json row = {{"regime", classify::RegimeLabel(kind)}, {"token", classify::RegimeToken(kind)}};
    nlohmann::json row_cells = nlohmann::json::array();
    for (const auto& b : config.Budgets()) {
      nlohmann::json cell = {{"column", ColumnLabel(b, true)},
                             {"budget", classify::RenderBudget(kind, b, true)},
                             {"budget_display", classify::RenderBudget(kind, b, false)}};
      std::vector<const RunRecord*> recs;
      std::vector<std::string> ids, failed_ids;
      std::vector<std::uint64_t> seeds;
      for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].cell.regime != kind || ColumnLabel(plan[i].cell.budget, true) != ColumnLabel(b, true)) continue;
        ids.push_back(plan_ids[i]);
        seeds.push_back(plan[i].seed);
        auto it = done.find(plan_ids[i]);
        if (it == done.end()) {
          failed_ids.push_back(plan_ids[i]);
        } else {
          recs.push_back(&it->second);
        }
      }
      cell["runs"] = ids;
      cell["seeds"] = seeds;
      if (!failed_ids.empty()) {
        cell["status"] = "failed";
        cell["failed_runs"] = failed_ids;
        cell["metrics"] = nullptr;
        for (const auto& t : test_names) {
          csv << classify::RegimeLabel(kind) << "," << cell["budget"].get<std::string>() << ","
              << cell["column"].get<std::string>() << "," << t << "," << seeds.size() << ",,,,\n";
          md_lines[t].push_back("| " + classify::RegimeLabel(kind) + " | " + ColumnLabel(b, false) + " | " +
                                cell["budget_display"].get<std::string>() + " | failed | failed |");
        }
      } else {
        cell["status"] = "ok";
        nlohmann::json metrics = nlohmann::json::object();
        for (const auto& t : test_names) {
          std::vector<double> auroc, auprc;
          for (const auto* r : recs) {
            auroc.push_back(r->metrics.at(t).at("auroc").get<double>());
            auprc.push_back(r->metrics.at(t).at("auprc").get<double>());
          }
          const auto a = eval::AggregateSeeds(auroc);
          const auto p = eval::AggregateSeeds(auprc);
          metrics[t] = {{"auroc", {{"mean", a.mean}, {"std", a.std}, {"values", auroc}}},
                        {"auprc", {{"mean", p.mean}, {"std", p.std}, {"values", auprc}}}};
          csv << classify::RegimeLabel(kind) << "," << cell["budget"].get<std::string>() << ","
              << cell["column"].get<std::string>() << "," << t << "," << seeds.size() << "," << a.mean << ","
              << a.std << "," << p.mean << "," << p.std << "\n";
          std::string shown = cell["budget_display"].get<std::string>();
          for (std::size_t pos = shown.find('|'); pos != std::string::npos; pos = shown.find('|', pos + 2)) {
            shown.replace(pos, 1, "\\|");
          }
          md_lines[t].push_back("| " + classify::RegimeLabel(kind) + " | " + ColumnLabel(b, false) + " | " + shown +
                                " | " + Fixed(a.mean) + " ± " + Fixed(a.std) + " | " + Fixed(p.mean) + " ± " +
                                Fixed(p.std) + " |");
        }
        cell["metrics"] = metrics;
        nlohmann::json spent = nlohmann::json::array();
        for (const auto* r : recs) spent.push_back(r->metrics.value("spent_epsilon", nlohmann::json(nullptr)));
        cell["spent_epsilon"] = spent;
      }
      row_cells.push_back(cell);
    }
    row["cells"] = row_cells;
    rows.push_back(row);
  }

  nlohmann::json columns = nlohmann::json::array();
  for (const auto& b : config.Budgets()) columns.push_back(ColumnLabel(b, true));
  nlohmann::json failure_list = nlohmann::json::array();
  for (const auto& [id, what] : failures) failure_list.push_back({{"run_id", id}, {"error", what}});
  summary.table = {{"config_digest", config.digest},
                   {"delta", config.privacy.delta},
                   {"seeds", config.Seeds()},
                   {"tests", test_names},
                   {"columns", columns},
                   {"rows", rows},
                   {"notes", prepared.notes},
                   {"runs",
                    {{"planned", summary.planned_runs},
                     {"unique", summary.unique_runs},
                     {"executed", summary.executed},
                     {"reused", summary.reused},
                     {"failed", summary.failed}}},
                   {"failures", failure_list}};
  for (std::size_t u : unique_plan) summary.run_ids.push_back(plan_ids[u]);

  std::ostringstream md;
  md << "# Classification results\n\nMean ± population std over " << config.classify.n_seeds
     << " seeds. Budgets at delta = " << config.privacy.delta << ".\n";
  for (const auto& t : test_names) {
    md << "\n## Test set: " << t << "\n\n| Regime | Column | Budget | AUROC | AUPRC |\n|---|---|---|---|---|\n";
    for (const auto& line : md_lines[t]) md << line << "\n";
  }
  summary.json_path = config.out / "table.json";
  summary.csv_path = config.out / "table.csv";
  summary.markdown_path = config.out / "table.md";
  WriteFileAtomic(summary.json_path, summary.table.dump(2) + "\n");
  WriteFileAtomic(summary.csv_path, csv.str());
  WriteFileAtomic(summary.markdown_path, md.str());
  return summary;
}

SynthesisSummary ReproduceSynthesisReport(const ExperimentConfig& config) {
  const ExperimentData d = PrepareData(config, true);
  const auto real = ToProvenanced(d.train);
  const auto syn = ToProvenanced(d.synthetic);
  const auto ext = ToProvenanced(d.external);

  struct Row {
    std::string label;
    const std::vector<eval::ProvenancedImage>* a;
    const std::vector<eval::ProvenancedImage>* b;
    bool same_set;
    bool share;
  };
  std::vector<Row> rows = {{"Syn/Real", &syn, &real, false, false},
                           {"Real/Real", &real, &real, true, false},
                           {"Syn/Syn", &syn, &syn, true, false},
                           {"Real/Real_BCDR", &real, &ext, false, false},
                           {"Real/Real (identical subsets)", &real, &real, true, true}};

  SynthesisSummary out;
  out.notices = d.notes;
  nlohmann::json report_rows = nlohmann::json::array();
  std::ostringstream csv, md;
  csv << "metric,row,mean,std,subsets,size_a,size_b\n";
  md << "# Synthesis report\n\nMean ± population std over " << config.eval.subsets << " subsets.\n\n"
     << "| Metric | Row | Value |\n|---|---|---|\n";
  for (const auto& metric_name : config.eval.metrics) {
    const eval::SetMetric metric = eval::MakeSetMetric(metric_name, config.eval.extractor);
    for (const auto& row : rows) {
      if (row.a->empty() || row.b->empty()) {
        out.notices.push_back(row.label + " skipped for " + metric_name + ": no external set configured");
        continue;
      }
      std::size_t size = config.eval.subset_size;
      if (size == 0) {
        size = std::min(Capacity(*row.a), Capacity(*row.b));
        // Two draws from one set need room to differ.
        if (row.same_set && !row.share) size = std::max<std::size_t>(2, size / 2);
      }
      eval::SubsetProtocolConfig pc;
      pc.n_subsets = config.eval.subsets;
      pc.size_a = size;
      pc.size_b = size;
      pc.seed = config.seed;
      pc.share_subsets = row.share;
      eval::MetricReport r = eval::PairedSubsetProtocol(*row.a, *row.b, pc, metric);
      nlohmann::json j = r.ToJson();
      j["row"] = row.label;
      j["control"] = row.share;
      report_rows.push_back(j);
      csv << metric_name << ",\"" << row.label << "\"," << r.value << "," << r.spread << "," << pc.n_subsets << ","
          << size << "," << size << "\n";
      md << "| " << metric_name << " | " << row.label << " | " << Fixed(r.value, 4) << " ± " << Fixed(r.spread, 4)
         << " |\n";
    }
  }
  out.grid_path = config.out / "synthesis_grid.png";
  std::filesystem::create_directories(config.out);
  WriteGrid(out.grid_path, d.synthetic);
  out.report = {{"config_digest", config.digest},
                {"extractor", config.eval.extractor},
                {"rows", report_rows},
                {"notices", out.notices},
                {"grid", out.grid_path.string()},
                {"sizes", {{"real", d.train.size()}, {"synthetic", d.synthetic.size()}, {"external", d.external.size()}}}};
  out.json_path = config.out / "synthesis.json";
  out.csv_path = config.out / "synthesis.csv";
  out.markdown_path = config.out / "synthesis.md";
  WriteFileAtomic(out.json_path, out.report.dump(2) + "\n");
  WriteFileAtomic(out.csv_path, csv.str());
  WriteFileAtomic(out.markdown_path, md.str());
  return out;
}

}  // namespace mammodp::experiment
