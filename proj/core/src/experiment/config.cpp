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

#include "mammodp/experiment/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/files.hpp"
#include "mammodp/common/hash.hpp"

namespace mammodp::experiment {
namespace {

namespace pt = boost::property_tree;

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> parts;
  std::string s(text);
  boost::split(parts, s, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

template <typename T>
bool ParseNumber(const std::string& s, T& out) {
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(s, &used));
      return used == s.size();
    } catch (const std::exception&) {
      return false;
    }
  } else {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  }
}

// Typed access to one INI section that remembers which keys were read.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree, const std::filesystem::path& base,
          std::vector<std::string>& issues)
      : name_(std::move(name)), tree_(tree), base_(base), issues_(issues) {}

  std::optional<std::string> Raw(const std::string& key) {
    known_.insert(key);
    if (tree_ == nullptr) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    std::string s = *v;
    boost::trim(s);
    return s;
  }

  template <typename T>
  void Number(const std::string& key, T& out) {
    if (auto v = Raw(key)) {
      T parsed{};
      if (ParseNumber(*v, parsed)) {
        out = parsed;
      } else {
        Bad(key, *v, "a number");
      }
    }
  }

  void Bool(const std::string& key, bool& out) {
    if (auto v = Raw(key)) {
      const std::string s = boost::to_lower_copy(*v);
      if (s == "true" || s == "1" || s == "yes" || s == "on") {
        out = true;
      } else if (s == "false" || s == "0" || s == "no" || s == "off") {
        out = false;
      } else {
        Bad(key, *v, "a boolean");
      }
    }
  }

  void String(const std::string& key, std::string& out) {
    if (auto v = Raw(key)) out = *v;
  }

  void Path(const std::string& key, std::filesystem::path& out, bool must_exist) {
    if (auto v = Raw(key)) {
      if (v->empty()) {
        out.clear();
        return;
      }
      std::filesystem::path p(*v);
      out = p.is_absolute() ? p : base_ / p;
      if (must_exist && !std::filesystem::exists(out)) Issue(key + ": path does not exist: " + out.string());
    }
  }

  void IntList(const std::string& key, std::vector<int>& out) {
    if (auto v = Raw(key)) {
      std::vector<int> parsed;
      for (const auto& p : SplitList(*v)) {
        int x = 0;
        if (!ParseNumber(p, x)) {
          Bad(key, *v, "a list of integers");
          return;
        }
        parsed.push_back(x);
      }
      out = std::move(parsed);
    }
  }

  void StringList(const std::string& key, std::vector<std::string>& out) {
    if (auto v = Raw(key)) out = SplitList(*v);
  }

  void Issue(const std::string& message) { issues_.push_back("[" + name_ + "] " + message); }

  void CheckUnknown() {
    if (tree_ == nullptr) return;
    for (const auto& [key, child] : *tree_) {
      if (!known_.count(key)) Issue("unknown key '" + key + "'");
    }
  }

 private:
  void Bad(const std::string& key, const std::string& value, const std::string& expected) {
    Issue(key + " = '" + value + "' is not " + expected);
  }

  std::string name_;
  const pt::ptree* tree_;
  std::filesystem::path base_;
  std::vector<std::string>& issues_;
  std::set<std::string> known_;
};

template <typename Fn>
void Collect(std::vector<std::string>& issues, const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    for (const auto& i : e.issues()) issues.push_back(prefix + i);
  } catch (const Error& e) {
    issues.push_back(prefix + e.what());
  }
}

std::string SourceName(DataSource s) {
  switch (s) {
    case DataSource::kFixture: return "fixture";
    case DataSource::kManifest: return "manifest";
    case DataSource::kRaw: return "raw";
  }
  return "fixture";
}

nlohmann::json PathJson(const std::filesystem::path& p) { return p.empty() ? nlohmann::json(nullptr) : nlohmann::json(p.string()); }

}  // namespace

std::vector<std::optional<double>> ParseEpsilonList(std::string_view text) {
  std::vector<std::optional<double>> out;
  std::vector<std::string> issues;
  for (const auto& item : SplitList(text)) {
    const std::string lower = boost::to_lower_copy(item);
    if (lower == "inf" || lower == "infinity" || item == "∞") {
      out.emplace_back(std::nullopt);
      continue;
    }
    double eps = 0.0;
    if (!ParseNumber(item, eps)) {
      issues.push_back("budget '" + item + "' is not a number or inf");
    } else if (!(eps > 0.0) || !std::isfinite(eps)) {
      issues.push_back("budget epsilon must be > 0, got " + item);
    } else {
      out.emplace_back(eps);
    }
  }
  if (out.empty() && issues.empty()) issues.push_back("budget list is empty");
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return out;
}

nlohmann::json ExperimentConfig::ToJson() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : privacy.epsilons) eps.push_back(e ? nlohmann::json(*e) : nlohmann::json("inf"));
  nlohmann::json regimes = nlohmann::json::array();
  for (auto r : classify.regimes) regimes.push_back(classify::RegimeToken(r));
  return {{"global", {{"seed", seed}, {"out", out.string()}, {"jobs", jobs}}},
          {"ingest",
           {{"source", SourceName(ingest.source)},
            {"manifest", PathJson(ingest.manifest)},
            {"images", PathJson(ingest.images)},
            {"annotations", PathJson(ingest.annotations)},
            {"external_manifest", PathJson(ingest.external_manifest)},
            {"val_fraction", ingest.val_fraction},
            {"margin_px", ingest.margin_px},
            {"fixture_patients", ingest.fixture_patients},
            {"fixture_external_patients", ingest.fixture_external_patients},
            {"fixture_seed", ingest.fixture_seed}}},
          {"gan",
           {{"synthesize", gan.synthesize},
            {"syn_manifest", PathJson(gan.syn_manifest)},
            {"checkpoint", PathJson(gan.checkpoint)},
            {"train", gan.train.ToJson()},
            {"n_benign", gan.n_benign},
            {"n_malignant", gan.n_malignant}}},
          {"privacy",
           {{"budgets", eps}, {"delta", privacy.delta}, {"clip_norm", privacy.clip_norm}, {"group_k", privacy.group_k}}},
          {"classify",
           {{"regimes", regimes},
            {"seeds", classify.n_seeds},
            {"fit", classify.fit.ToJson()},
            {"pretrain_fit", classify.pretrain_fit.ToJson()},
            {"last_layers", classify.last_layers},
            {"backbone", classify.backbone.ToJson()},
            {"backbone_weights", PathJson(classify.backbone_weights)}}},
          {"eval",
           {{"metrics", eval.metrics},
            {"extractor", eval.extractor},
            {"subsets", eval.subsets},
            {"subset_size", eval.subset_size}}},
          {"digest", digest}};
}

std::vector<std::optional<privacy::PrivacyBudget>> ExperimentConfig::Budgets() const {
  std::vector<std::optional<privacy::PrivacyBudget>> out;
  for (const auto& e : privacy.epsilons) {
    if (e) {
      out.emplace_back(privacy::PrivacyBudget::Make(*e, privacy.delta));
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

std::vector<std::uint64_t> ExperimentConfig::Seeds() const {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < classify.n_seeds; ++i) out.push_back(seed + static_cast<std::uint64_t>(i));
  return out;
}

bool ExperimentConfig::NeedsSynthetic() const {
  return std::any_of(classify.regimes.begin(), classify.regimes.end(), classify::UsesSyntheticData);
}

ExperimentConfig ParseConfig(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"malformed config: " + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }

  std::vector<std::string> issues;
  ExperimentConfig c;
  c.digest = Sha256Hex(text);
  c.classify.pretrain_fit.epochs = 1;

  static const std::set<std::string> kSections = {"global", "ingest", "gan", "privacy", "classify", "eval"};
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty()) {
      issues.push_back("key '" + name + "' outside any section");
    } else if (!kSections.count(name)) {
      issues.push_back("unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second, base_dir, issues);
  };

  Section global = section("global");
  global.Number("seed", c.seed);
  global.Path("out", c.out, false);
  if (!global.Raw("out")) c.out = base_dir / "out";
  global.Number("jobs", c.jobs);
  if (c.jobs < 1) global.Issue("jobs must be >= 1");
  global.CheckUnknown();

  Section ing = section("ingest");
  std::string source = "fixture";
  ing.String("source", source);
  if (source == "fixture") {
    c.ingest.source = DataSource::kFixture;
  } else if (source == "manifest") {
    c.ingest.source = DataSource::kManifest;
  } else if (source == "raw") {
    c.ingest.source = DataSource::kRaw;
  } else {
    ing.Issue("source must be fixture, manifest or raw, got '" + source + "'");
  }
  ing.Path("manifest", c.ingest.manifest, true);
  ing.Path("images", c.ingest.images, true);
  ing.Path("annotations", c.ingest.annotations, true);
  ing.Path("external_manifest", c.ingest.external_manifest, true);
  ing.Number("val_fraction", c.ingest.val_fraction);
  ing.Number("margin_px", c.ingest.margin_px);
  ing.Number("fixture_patients", c.ingest.fixture_patients);
  ing.Number("fixture_external_patients", c.ingest.fixture_external_patients);
  ing.Number("fixture_seed", c.ingest.fixture_seed);
  if (c.ingest.source == DataSource::kManifest && c.ingest.manifest.empty()) ing.Issue("source = manifest needs manifest");
  if (c.ingest.source == DataSource::kRaw && (c.ingest.images.empty() || c.ingest.annotations.empty())) {
    ing.Issue("source = raw needs images and annotations");
  }
  if (!(c.ingest.val_fraction > 0.0 && c.ingest.val_fraction < 1.0)) ing.Issue("val_fraction must be in (0, 1)");
  if (c.ingest.margin_px < 0) ing.Issue("margin_px must be >= 0");
  if (c.ingest.fixture_patients < 4) ing.Issue("fixture_patients must be >= 4");
  if (c.ingest.fixture_external_patients < 0) ing.Issue("fixture_external_patients must be >= 0");
  ing.CheckUnknown();

  Section g = section("gan");
  auto& gt = c.gan.train;
  g.Bool("synthesize", c.gan.synthesize);
  g.Path("syn_manifest", c.gan.syn_manifest, true);
  g.Path("checkpoint", c.gan.checkpoint, true);
  g.Number("epochs", gt.epochs);
  g.Number("max_steps", gt.max_steps);
  g.Number("batch_size", gt.batch_size);
  g.Number("base_width", gt.arch.base_width);
  g.Number("g_lr", gt.g_lr);
  g.Number("d_lr", gt.d_lr);
  g.Number("n_benign", c.gan.n_benign);
  g.Number("n_malignant", c.gan.n_malignant);
  if (c.gan.n_benign < 0 || c.gan.n_malignant < 0) g.Issue("n_benign and n_malignant must be >= 0");
  Collect(issues, "[gan] ", [&] { gt.Validate(); });
  g.CheckUnknown();

  Section p = section("privacy");
  if (auto v = p.Raw("budgets")) {
    Collect(issues, "[privacy] ", [&] { c.privacy.epsilons = ParseEpsilonList(*v); });
  }
  p.Number("delta", c.privacy.delta);
  p.Number("clip_norm", c.privacy.clip_norm);
  p.Number("group_k", c.privacy.group_k);
  if (!(c.privacy.delta > 0.0 && c.privacy.delta < 1.0)) p.Issue("delta must be in (0, 1)");
  if (!(c.privacy.clip_norm > 0.0)) p.Issue("clip_norm must be > 0");
  if (c.privacy.group_k < 1) p.Issue("group_k must be >= 1");
  p.CheckUnknown();

  Section k = section("classify");
  auto& fit = c.classify.fit;
  auto& pre = c.classify.pretrain_fit;
  if (auto v = k.Raw("regimes")) {
    std::vector<classify::RegimeKind> regimes;
    for (const auto& token : SplitList(*v)) {
      Collect(issues, "[classify] ", [&] { regimes.push_back(classify::ParseRegime(token)); });
    }
    if (regimes.empty()) k.Issue("regimes is empty");
    c.classify.regimes = std::move(regimes);
  }
  k.Number("seeds", c.classify.n_seeds);
  if (c.classify.n_seeds < 1) k.Issue("seeds must be >= 1");
  k.Number("epochs", fit.epochs);
  k.Number("batch_size", fit.batch_size);
  k.Number("lr", fit.lr);
  k.Number("weight_decay", fit.weight_decay);
  k.Number("label_smoothing", fit.label_smoothing);
  k.Number("flip_p", fit.flip_p);
  k.Bool("select_lowest_auprc", fit.select_lowest_auprc);
  pre.lr = fit.lr;
  pre.weight_decay = fit.weight_decay;
  pre.label_smoothing = fit.label_smoothing;
  pre.batch_size = fit.batch_size;
  pre.flip_p = fit.flip_p;
  pre.select_lowest_auprc = fit.select_lowest_auprc;
  k.Number("pretrain_epochs", pre.epochs);
  k.Number("pretrain_batch_size", pre.batch_size);
  k.Number("pretrain_lr", pre.lr);
  k.StringList("last_layers", c.classify.last_layers);
  if (c.classify.last_layers.empty()) k.Issue("last_layers is empty");
  auto& bb = c.classify.backbone;
  k.Number("embed_dim", bb.embed_dim);
  k.IntList("depths", bb.depths);
  k.IntList("heads", bb.heads);
  k.Number("window", bb.window);
  k.Number("patch_size", bb.patch);
  k.Number("backbone_seed", bb.seed);
  k.Path("backbone_weights", c.classify.backbone_weights, true);
  Collect(issues, "[classify] ", [&] { fit.Validate(); });
  Collect(issues, "[classify] pretrain ", [&] { pre.Validate(); });
  Collect(issues, "[classify] ", [&] { bb.Validate(); });
  k.CheckUnknown();

  Section e = section("eval");
  e.StringList("metrics", c.eval.metrics);
  e.String("extractor", c.eval.extractor);
  e.Number("subsets", c.eval.subsets);
  e.Number("subset_size", c.eval.subset_size);
  for (const auto& m : c.eval.metrics) {
    if (m != "fid" && m != "frd") e.Issue("unknown metric '" + m + "' (expected fid or frd)");
  }
  if (c.eval.subsets < 1) e.Issue("subsets must be >= 1");
  e.CheckUnknown();

  if (c.NeedsSynthetic() && !c.gan.synthesize && c.gan.syn_manifest.empty() && c.gan.checkpoint.empty()) {
    issues.push_back("regimes using synthetic data need [gan] syn_manifest, checkpoint, or synthesize = true");
  }
  if (c.NeedsSynthetic() && c.gan.syn_manifest.empty() && c.gan.n_benign + c.gan.n_malignant == 0) {
    issues.push_back("regimes using synthetic data need n_benign + n_malignant > 0");
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError({"config file not found: " + path.string()});
  const std::string text = ReadFile(path);
  ExperimentConfig c = ParseConfig(text, path.parent_path().empty() ? "." : path.parent_path());
  c.path = path;
  return c;
}

std::vector<PlannedCell> PlanCells(const ExperimentConfig& config) {
  std::vector<PlannedCell> cells;
  const auto budgets = config.Budgets();
  for (auto r : config.classify.regimes) {
    for (const auto& b : budgets) cells.push_back({r, b});
  }
  return cells;
}

std::vector<PlannedRun> PlanRuns(const ExperimentConfig& config) {
  std::vector<PlannedRun> runs;
  for (const auto& cell : PlanCells(config)) {
    for (auto s : config.Seeds()) runs.push_back({cell, s});
  }
  return runs;
}

}  // namespace mammodp::experiment
