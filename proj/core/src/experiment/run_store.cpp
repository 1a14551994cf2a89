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

#include "mammodp/experiment/run_store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/files.hpp"

namespace mammodp::experiment {

nlohmann::json RunRecord::ToJson() const {
  return {{"run_id", run_id},   {"config_digest", config_digest},
          {"input_hash", input_hash}, {"regime", regime},
          {"budget", budget},   {"seed", seed},
          {"started", started}, {"finished", finished},
          {"artifacts", artifacts}, {"metrics", metrics},
          {"report", report}};
}

RunRecord RunRecord::FromJson(const nlohmann::json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.config_digest = j.at("config_digest").get<std::string>();
  r.input_hash = j.at("input_hash").get<std::string>();
  r.regime = j.at("regime").get<std::string>();
  r.budget = j.at("budget").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.started = j.at("started").get<std::string>();
  r.finished = j.at("finished").get<std::string>();
  r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  r.metrics = j.at("metrics");
  r.report = j.value("report", nlohmann::json::object());
  return r;
}

RunStore::RunStore(std::filesystem::path root) : root_(std::move(root)) {}

std::optional<RunRecord> RunStore::Find(const std::string& run_id) const {
  const auto path = root_ / "runs" / (run_id + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return RunRecord::FromJson(nlohmann::json::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt run record " + path.string() + ": " + e.what());
  }
}

std::filesystem::path RunStore::Write(const RunRecord& record) const {
  const auto path = root_ / "runs" / (record.run_id + ".json");
  WriteFileAtomic(path, record.ToJson().dump(2) + "\n");
  return path;
}

std::filesystem::path RunStore::Quarantine(const std::string& run_id, const nlohmann::json& failure) const {
  const auto path = root_ / "quarantine" / (run_id + ".json");
  WriteFileAtomic(path, failure.dump(2) + "\n");
  return path;
}

void RunStore::ClearQuarantine(const std::string& run_id) const {
  std::error_code ec;
  std::filesystem::remove(root_ / "quarantine" / (run_id + ".json"), ec);
}

std::vector<std::string> RunStore::CompletedIds() const {
  std::vector<std::string> ids;
  const auto dir = root_ / "runs";
  if (!std::filesystem::exists(dir)) return ids;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string TimestampNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mammodp::experiment
