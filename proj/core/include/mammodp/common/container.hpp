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

#ifndef MAMMODP_COMMON_CONTAINER_HPP_
#define MAMMODP_COMMON_CONTAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mammodp {

struct Blob {
  std::vector<std::int64_t> shape;
  std::vector<double> values;
};

// Self-describing binary container used for checkpoints:
//   "MDPCKPT1" | u64 header length | JSON header | raw little-endian doubles.
// The header lists every blob (name, shape, offset) next to free-form
// metadata, so a file can be inspected without knowing its producer.
struct BlobContainer {
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, Blob> blobs;

  void Save(const std::filesystem::path& path) const;
  static BlobContainer Load(const std::filesystem::path& path);
};

}  // namespace mammodp

#endif  // MAMMODP_COMMON_CONTAINER_HPP_
