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

#ifndef MAMMODP_TOOLS_COMMANDS_HPP_
#define MAMMODP_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mammodp/experiment/config.hpp"

namespace mammodp::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

// The action chosen on the command line; returns the process exit code.
using Action = std::function<int()>;

void AddIngest(CLI::App& app, const GlobalOptions& g, Action& action);
void AddMakeFixture(CLI::App& app, const GlobalOptions& g, Action& action);
void AddTrainGan(CLI::App& app, const GlobalOptions& g, Action& action);
void AddSampleSyn(CLI::App& app, const GlobalOptions& g, Action& action);
void AddTrainClf(CLI::App& app, const GlobalOptions& g, Action& action);
void AddAccountant(CLI::App& app, const GlobalOptions& g, Action& action);
void AddEvaluate(CLI::App& app, const GlobalOptions& g, Action& action);
void AddEvaluateClf(CLI::App& app, const GlobalOptions& g, Action& action);
void AddValidate(CLI::App& app, const GlobalOptions& g, Action& action);
void AddReproduce(CLI::App& app, const GlobalOptions& g, Action& action);

void PrintJson(const nlohmann::json& j);
std::string RequireOut(const GlobalOptions& g);
std::uint64_t SeedOr(const GlobalOptions& g, std::uint64_t fallback);
// Loads --config when given, applying --seed/--out/--jobs overrides.
std::optional<experiment::ExperimentConfig> OptionalConfig(const GlobalOptions& g);

}  // namespace mammodp::tools

#endif  // MAMMODP_TOOLS_COMMANDS_HPP_
