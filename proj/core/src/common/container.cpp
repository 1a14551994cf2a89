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

#include "mammodp/common/container.hpp"

#include <cstring>
#include <fstream>
#include <numeric>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/files.hpp"

namespace mammodp {
namespace {

constexpr char kMagic[8] = {'M', 'D', 'P', 'C', 'K', 'P', 'T', '1'};

std::int64_t Numel(const std::vector<std::int64_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

}  // namespace

void BlobContainer::Save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["metadata"] = metadata;
  header["blobs"] = nlohmann::json::array();
  std::int64_t offset = 0;
  for (const auto& [name, blob] : blobs) {
    if (Numel(blob.shape) != static_cast<std::int64_t>(blob.values.size())) {
      throw ContractViolation("blob '" + name + "' shape does not match its value count");
    }
    header["blobs"].push_back({{"name", name}, {"shape", blob.shape}, {"offset", offset}});
    offset += static_cast<std::int64_t>(blob.values.size());
  }
  const std::string text = header.dump();
  std::string bytes(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  bytes.append(reinterpret_cast<const char*>(&len), sizeof(len));
  bytes += text;
  for (const auto& [name, blob] : blobs) {
    bytes.append(reinterpret_cast<const char*>(blob.values.data()), blob.values.size() * sizeof(double));
  }
  WriteFileAtomic(path, bytes);
}

BlobContainer BlobContainer::Load(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a checkpoint container: " + path.string());
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + sizeof(kMagic), sizeof(len));
  const std::size_t data_start = sizeof(kMagic) + sizeof(len) + len;
  if (data_start > bytes.size()) throw IoError("truncated checkpoint header: " + path.string());
  const auto header = nlohmann::json::parse(bytes.substr(sizeof(kMagic) + sizeof(len), len));
  BlobContainer out;
  out.metadata = header.at("metadata");
  for (const auto& entry : header.at("blobs")) {
    Blob blob;
    blob.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    const auto offset = entry.at("offset").get<std::int64_t>();
    const auto n = Numel(blob.shape);
    const std::size_t begin = data_start + static_cast<std::size_t>(offset) * sizeof(double);
    if (begin + n * sizeof(double) > bytes.size()) throw IoError("truncated checkpoint data: " + path.string());
    blob.values.resize(static_cast<std::size_t>(n));
    std::memcpy(blob.values.data(), bytes.data() + begin, n * sizeof(double));
    out.blobs.emplace(entry.at("name").get<std::string>(), std::move(blob));
  }
  return out;
}

}  // namespace mammodp
