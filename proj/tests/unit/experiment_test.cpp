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

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "mammodp/common/errors.hpp"
#include "mammodp/experiment/config.hpp"
#include "mammodp/experiment/reproduce.hpp"
#include "mammodp/experiment/run_store.hpp"

namespace mammodp::experiment {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mammodp_experiment_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string TinyConfig(const fs::path& out, const std::string& regimes, const std::string& budgets, int seeds) {
  return "[global]\nseed = 0\nout = " + out.string() +
         "\n\n[ingest]\nsource = fixture\nfixture_patients = 10\nfixture_external_patients = 0\nval_fraction = 0.25\n"
         "\n[gan]\nsynthesize = true\nepochs = 1\nmax_steps = 2\nbatch_size = 2\nbase_width = 2\nn_benign = 3\n"
         "n_malignant = 3\n"
         "\n[privacy]\nbudgets = " +
         budgets + "\ndelta = 1e-4\n\n[classify]\nregimes = " + regimes + "\nseeds = " + std::to_string(seeds) +
         "\nepochs = 1\nbatch_size = 4\nlr = 5e-3\npretrain_epochs = 1\nembed_dim = 8\ndepths = 1, 1, 1, 1\n"
         "heads = 1, 2, 2, 4\n";
}

TEST(Config, ParsesAndDigestsDeterministically) {
  const std::string text = TinyConfig("/tmp/x", "real, syn", "6, inf", 2);
  const ExperimentConfig a = ParseConfig(text), b = ParseConfig(text);
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(a.digest.size(), 64u);
  EXPECT_EQ(a.classify.n_seeds, 2);
  EXPECT_EQ(a.classify.backbone.embed_dim, 8);
  ASSERT_EQ(a.privacy.epsilons.size(), 2u);
  EXPECT_EQ(a.privacy.epsilons[0], 6.0);
  EXPECT_FALSE(a.privacy.epsilons[1].has_value());
  const ExperimentConfig c = ParseConfig(TinyConfig("/tmp/x", "real, syn", "6, inf", 3));
  EXPECT_NE(a.digest, c.digest);
  EXPECT_EQ(a.Seeds().size(), 2u);
}

TEST(Config, ReportsEveryIssue) {
  std::string text = TinyConfig("/tmp/x", "real, bogus", "0, inf", 1) + "colour = blue\n";
  try {
    ParseConfig(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    std::string all;
    for (const auto& i : e.issues()) all += i + "\n";
    EXPECT_NE(all.find("colour"), std::string::npos) << all;
    EXPECT_NE(all.find("bogus"), std::string::npos) << all;
    EXPECT_NE(all.find("> 0"), std::string::npos) << all;
    EXPECT_GE(e.issues().size(), 3u);
  }
  EXPECT_THROW(ParseConfig("[global\nseed = 1\n"), ConfigError);
  EXPECT_THROW(ParseConfig("[nonsense]\na = 1\n"), ConfigError);
  EXPECT_THROW(LoadConfig(TempDir("missing") / "absent.ini"), ConfigError);
}

TEST(Config, EpsilonList) {
  const auto list = ParseEpsilonList("1, 6, 12, 20, inf");
  ASSERT_EQ(list.size(), 5u);
  EXPECT_EQ(list[2], 12.0);
  EXPECT_FALSE(list[4].has_value());
  EXPECT_THROW(ParseEpsilonList("-1"), ConfigError);
  EXPECT_THROW(ParseEpsilonList("six"), ConfigError);
  EXPECT_THROW(ParseEpsilonList(""), ConfigError);
}

TEST(Plan, FullGridHasOneCellPerRegimeAndBudget) {
  const auto config =
      ParseConfig(TinyConfig("/tmp/x", "real, syn, synpre, real+syn, synpre+realft", "1, 6, 12, 20, inf", 3));
  EXPECT_EQ(PlanCells(config).size(), 25u);
  EXPECT_EQ(PlanRuns(config).size(), 75u);
}

TEST(Plan, RunsAreCellsTimesSeeds) {
  const auto config = ParseConfig(TinyConfig("/tmp/x", "real, syn, real+syn", "6, inf", 3));
  const auto cells = PlanCells(config);
  const auto runs = PlanRuns(config);
  EXPECT_EQ(cells.size(), 6u);
  ASSERT_EQ(runs.size(), 18u);
  std::set<std::uint64_t> seeds;
  for (const auto& r : runs) seeds.insert(r.seed);
  EXPECT_EQ(seeds.size(), 3u);
}

TEST(RunStoreTest, RoundTripAndQuarantine) {
  const fs::path dir = TempDir("store");
  const RunStore store(dir);
  RunRecord rec;
  rec.run_id = "abc123";
  rec.config_digest = "d";
  rec.regime = "Real";
  rec.budget = "inf";
  rec.seed = 2;
  rec.metrics = {{"internal", {{"auroc", 0.5}}}};
  EXPECT_FALSE(store.Find("abc123").has_value());
  store.Write(rec);
  const auto back = store.Find("abc123");
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->ToJson(), rec.ToJson());
  EXPECT_EQ(store.CompletedIds(), std::vector<std::string>{"abc123"});
  const auto q = store.Quarantine("zzz", {{"error", "boom"}});
  EXPECT_TRUE(fs::exists(q));
  store.ClearQuarantine("zzz");
  EXPECT_FALSE(fs::exists(q));
}

TEST(Reproduce, ResumesWithoutRecomputationAndQuarantinesFailures) {
  const fs::path dir = TempDir("reproduce");
  const auto config = ParseConfig(TinyConfig(dir / "out", "real, syn", "6, inf", 1));
  ReproduceOptions options;
  options.verbose = false;
  options.before_run = [](const PlannedRun& run) {
    if (run.cell.regime == classify::RegimeKind::kSyn) throw std::runtime_error("injected failure");
  };
  const auto first = ReproduceTable(config, options);
  EXPECT_EQ(first.planned_runs, 4u);
  EXPECT_EQ(first.unique_runs, 3u);
  EXPECT_EQ(first.executed, 2u);
  EXPECT_EQ(first.failed, 1u);
  ASSERT_EQ(first.table["rows"].size(), 2u);
  for (const auto& cell : first.table["rows"][1]["cells"]) {
    EXPECT_EQ(cell["status"], "failed");
    EXPECT_TRUE(cell["metrics"].is_null());
  }
  for (const auto& cell : first.table["rows"][0]["cells"]) EXPECT_EQ(cell["status"], "ok");
  EXPECT_EQ(std::distance(fs::directory_iterator(config.out / "quarantine"), fs::directory_iterator{}), 1);
  EXPECT_TRUE(fs::exists(first.json_path));
  EXPECT_TRUE(fs::exists(first.csv_path));
  EXPECT_TRUE(fs::exists(first.markdown_path));

  options.before_run = nullptr;
  const auto second = ReproduceTable(config, options);
  EXPECT_EQ(second.executed, 1u);
  EXPECT_EQ(second.reused, 2u);
  EXPECT_EQ(second.failed, 0u);
  EXPECT_EQ(std::distance(fs::directory_iterator(config.out / "quarantine"), fs::directory_iterator{}), 0);

  const auto third = ReproduceTable(config, options);
  EXPECT_EQ(third.executed, 0u);
  EXPECT_EQ(third.reused, 3u);
  EXPECT_EQ(third.table["rows"], second.table["rows"]);
}

}  // namespace
}  // namespace mammodp::experiment
