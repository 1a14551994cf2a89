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

#include <algorithm>
#include <iostream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "commands.hpp"
#include "mammodp/common/errors.hpp"
#include "mammodp/common/files.hpp"
#include "mammodp/common/image.hpp"
#include "mammodp/eval/curves.hpp"
#include "mammodp/eval/metrics.hpp"
#include "mammodp/eval/protocol.hpp"
#include "mammodp/experiment/reproduce.hpp"
#include "mammodp/ingest/pipeline.hpp"

namespace mammodp::tools {
namespace {

// A patch archive (manifest.csv present) keeps its provenance; a bare image
// folder is treated as independent samples without patient structure.
std::vector<eval::ProvenancedImage> LoadImageSet(const std::filesystem::path& dir) {
  std::vector<eval::ProvenancedImage> out;
  if (std::filesystem::exists(dir / "manifest.csv")) {
    for (auto& p : ingest::LoadPatches(dir / "manifest.csv")) {
      out.push_back({std::move(p.pixels), p.provenance.image_id, p.synthetic ? "" : p.provenance.patient_id,
                     ingest::LabelIndex(p.label), p.synthetic});
    }
    return out;
  }
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (ext == ".png" || ext == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back({ReadImage(f), f.stem().string(), "", 0, true});
  if (out.empty()) throw EmptyInputError("no images in " + dir.string());
  return out;
}

// One value per line; with commas the last field is used. A first line
// that is not numeric is taken as a header.
template <typename T>
std::vector<T> ReadColumn(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<T> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    boost::trim(line);
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    boost::trim(field);
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
      values.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      if (!first) throw IoError(path.string() + ": cannot parse '" + field + "'");
    }
    first = false;
  }
  return values;
}

}  // namespace

void AddEvaluate(CLI::App& app, const GlobalOptions& g, Action& action) {
  struct Opts {
    std::string set_a, set_b, metric = "fid", extractor = "img-surrogate";
    int subsets = 3;
    std::size_t size = 0;
    bool identical = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("evaluate", "Fréchet distance between two image sets over random subsets");
  cmd->add_option("--set-a", o->set_a, "First image set (patch archive or image folder)")->required();
  cmd->add_option("--set-b", o->set_b, "Second image set")->required();
  cmd->add_option("--metric", o->metric, "fid or frd")->check(CLI::IsMember({"fid", "frd"}));
  cmd->add_option("--extractor", o->extractor, "Embedding backend for fid");
  cmd->add_option("--subsets", o->subsets, "Number of subsets")->check(CLI::PositiveNumber);
  cmd->add_option("--size", o->size, "Images per subset and side (0: as many as available)");
  cmd->add_flag("--identical-subsets", o->identical, "Draw both sides with the same random stream");
  cmd->callback([&g, &action, o] {
    action = [&g, o] {
      const auto a = LoadImageSet(o->set_a);
      const auto b = LoadImageSet(o->set_b);
      eval::SubsetProtocolConfig pc;
      pc.n_subsets = o->subsets;
      pc.size_a = o->size;
      pc.size_b = o->size;
      pc.seed = SeedOr(g, 0);
      pc.share_subsets = o->identical;
      const auto metric = eval::MakeSetMetric(o->metric, o->extractor);
      const auto report = eval::PairedSubsetProtocol(a, b, pc, metric);
      nlohmann::json j = report.ToJson();
      if (!g.out.empty()) WriteFileAtomic(std::filesystem::path(g.out) / "evaluate.json", j.dump(2) + "\n");
      PrintJson(j);
      return kExitOk;
    };
  });
}

void AddEvaluateClf(CLI::App& app, const GlobalOptions&, Action& action) {
  struct Opts {
    std::string predictions, labels;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("evaluate-clf", "AUROC and AUPRC of malignancy scores");
  cmd->add_option("--predictions", o->predictions, "Scores, one per line")->required()->check(CLI::ExistingFile);
  cmd->add_option("--labels", o->labels, "Labels 0/1, one per line")->required()->check(CLI::ExistingFile);
  cmd->callback([&action, o] {
    action = [o] {
      const auto scores = ReadColumn<double>(o->predictions);
      const auto labels = ReadColumn<int>(o->labels);
      if (scores.size() != labels.size()) {
        throw ContractViolation("predictions and labels differ in length (" + std::to_string(scores.size()) +
                                " vs " + std::to_string(labels.size()) + ")");
      }
      PrintJson({{"auroc", eval::Auroc(scores, labels)}, {"auprc", eval::Auprc(scores, labels)}, {"n", scores.size()}});
      return kExitOk;
    };
  });
}

void AddValidate(CLI::App& app, const GlobalOptions& g, Action& action) {
  auto* cmd = app.add_subcommand("validate", "Check an experiment config and print its run plan");
  cmd->callback([&g, &action] {
    action = [&g] {
      const auto cfg = OptionalConfig(g);
      if (!cfg) throw ConfigError({"--config is required"});
      nlohmann::json cells = nlohmann::json::array();
      for (const auto& c : experiment::PlanCells(*cfg)) {
        cells.push_back({{"regime", classify::RegimeLabel(c.regime)},
                         {"budget", classify::RenderBudget(c.regime, c.budget, true)}});
      }
      PrintJson({{"digest", cfg->digest},
                 {"cells", cells.size()},
                 {"runs", experiment::PlanRuns(*cfg).size()},
                 {"plan", cells},
                 {"config", cfg->ToJson()}});
      return kExitOk;
    };
  });
}

void AddReproduce(CLI::App& app, const GlobalOptions& g, Action& action) {
  auto report = std::make_shared<std::string>("all");
  auto quiet = std::make_shared<bool>(false);
  auto* cmd = app.add_subcommand("reproduce", "Run the regime grid and the synthesis report from a config");
  cmd->add_option("--report", *report, "table, synthesis or all")->check(CLI::IsMember({"table", "synthesis", "all"}));
  cmd->add_flag("--quiet", *quiet, "No per-run progress on stderr");
  cmd->callback([&g, &action, report, quiet] {
    action = [&g, report, quiet] {
      const auto cfg = OptionalConfig(g);
      if (!cfg) throw ConfigError({"--config is required"});
      nlohmann::json out = {{"config_digest", cfg->digest}};
      int code = kExitOk;
      if (*report == "table" || *report == "all") {
        experiment::ReproduceOptions opts;
        opts.verbose = !*quiet;
        const auto s = experiment::ReproduceTable(*cfg, opts);
        out["table"] = {{"json", s.json_path.string()},
                        {"csv", s.csv_path.string()},
                        {"markdown", s.markdown_path.string()},
                        {"runs", s.table.at("runs")}};
        if (s.failed > 0) {
          out["quarantine"] = s.table.at("failures");
          code = kExitRuntime;
        }
      }
      if (*report == "synthesis" || *report == "all") {
        const auto s = experiment::ReproduceSynthesisReport(*cfg);
        out["synthesis"] = {{"json", s.json_path.string()},
                            {"csv", s.csv_path.string()},
                            {"markdown", s.markdown_path.string()},
                            {"grid", s.grid_path.string()},
                            {"notices", s.notices}};
      }
      PrintJson(out);
      if (code == kExitRuntime) {
        std::cerr << nlohmann::json({{"error", "runtime"}, {"quarantine", out["quarantine"]}}).dump(2) << std::endl;
      }
      return code;
    };
  });
}

}  // namespace mammodp::tools
