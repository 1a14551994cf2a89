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

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mammodp/common/errors.hpp"

namespace mammodp::tools {

void PrintJson(const nlohmann::json& j) { std::cout << j.dump(2) << std::endl; }

std::string RequireOut(const GlobalOptions& g) {
  if (g.out.empty()) throw ConfigError({"--out is required"});
  return g.out;
}

std::uint64_t SeedOr(const GlobalOptions& g, std::uint64_t fallback) { return g.seed ? *g.seed : fallback; }

std::optional<experiment::ExperimentConfig> OptionalConfig(const GlobalOptions& g) {
  if (g.config.empty()) return std::nullopt;
  experiment::ExperimentConfig c = experiment::LoadConfig(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out = g.out;
  c.jobs = g.jobs;
  return c;
}

}  // namespace mammodp::tools

int main(int argc, char** argv) {
  using namespace mammodp::tools;
  CLI::App app{"mammodp: differentially private breast-mass classification toolkit"};
  app.fallthrough(true);
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config (INI)");
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Parallel runs for reproduce")->check(CLI::PositiveNumber);

  Action action;
  AddIngest(app, g, action);
  AddMakeFixture(app, g, action);
  AddTrainGan(app, g, action);
  AddSampleSyn(app, g, action);
  AddTrainClf(app, g, action);
  AddAccountant(app, g, action);
  AddEvaluate(app, g, action);
  AddEvaluateClf(app, g, action);
  AddValidate(app, g, action);
  AddReproduce(app, g, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const mammodp::ConfigError& e) {
    nlohmann::json err = {{"error", "config"}, {"issues", e.issues()}};
    std::cerr << err.dump(2) << std::endl;
    return kExitConfig;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", "runtime"}, {"message", e.what()}};
    std::cerr << err.dump(2) << std::endl;
    return kExitRuntime;
  }
}
