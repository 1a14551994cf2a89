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

#ifndef MAMMODP_EXPERIMENT_RUN_STORE_HPP_
#define MAMMODP_EXPERIMENT_RUN_STORE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mammodp::experiment {

struct RunRecord {
  std::string run_id;  // content hash of every input of the run
  std::string config_digest;
  std::string input_hash;  // hash of the image sets the run touched
  std::string regime;
  std::string budget;  // machine rendering, "inf" for none
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> artifacts;
  nlohmann::json metrics = nlohmann::json::object();
  nlohmann::json report = nlohmann::json::object();

  nlohmann::json ToJson() const;
  static RunRecord FromJson(const nlohmann::json& j);
};

// Completed runs under <root>/runs/<run_id>.json and failures under
// <root>/quarantine/<run_id>.json. Writes are atomic (temp file + rename).
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  std::optional<RunRecord> Find(const std::string& run_id) const;
  std::filesystem::path Write(const RunRecord& record) const;
  std::filesystem::path Quarantine(const std::string& run_id, const nlohmann::json& failure) const;
  // Removes a stale quarantine entry once the run has succeeded.
  void ClearQuarantine(const std::string& run_id) const;
  std::vector<std::string> CompletedIds() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// UTC, ISO 8601 with seconds.
std::string TimestampNow();

}  // namespace mammodp::experiment

#endif  // MAMMODP_EXPERIMENT_RUN_STORE_HPP_
