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

#ifndef MAMMODP_INGEST_PIPELINE_HPP_
#define MAMMODP_INGEST_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mammodp/ingest/geometry.hpp"
#include "mammodp/ingest/manifest.hpp"

namespace mammodp::ingest {

struct IngestOptions {
  std::filesystem::path images_dir;
  std::filesystem::path annotations;
  std::filesystem::path out_dir;
  double val_fraction = 0.15;
  std::uint64_t seed = 0;
  int margin_px = kDefaultMarginPx;
  int min_side = kMinPatchSide;
};

struct RejectedRecord {
  std::string image_id;
  std::string reason;
};

struct IngestResult {
  DatasetManifest manifest;
  std::vector<RejectedRecord> rejected;
};

// Finds "<image_id>.png" or "<image_id>.pgm" under dir.
std::filesystem::path LocateImage(const std::filesystem::path& dir, const std::string& image_id);

// Reads annotations, normalizes each source image, writes one 16-bit PNG per
// patch plus out_dir/manifest.csv. Corrupt records are skipped and listed.
IngestResult IngestDataset(const IngestOptions& options);

// Persists patches as a patch archive (PNG files + manifest.csv) in dir.
void WritePatchArchive(const std::filesystem::path& dir, const std::vector<MassPatch>& patches,
                       const std::vector<Split>& splits);

// Loads the patches listed in a manifest that sits next to its PNG files.
std::vector<MassPatch> LoadPatches(const std::filesystem::path& manifest_path,
                                   std::optional<Split> only = std::nullopt);

}  // namespace mammodp::ingest

#endif  // MAMMODP_INGEST_PIPELINE_HPP_
