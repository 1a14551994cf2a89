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

#ifndef MAMMODP_INGEST_MANIFEST_HPP_
#define MAMMODP_INGEST_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mammodp/ingest/records.hpp"

namespace mammodp::ingest {

// Records plus a parallel split vector; one split per patient.
struct DatasetManifest {
  std::vector<LesionRecord> records;
  std::vector<Split> splits;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return records.size(); }
  std::vector<std::size_t> Indices(Split split) const;
};

// Patients are partitioned, not images. Records with a predefined test split
// keep it; the remaining patients are shuffled (sorted ids, seeded) and
// round(val_fraction * n) of them, clamped to [1, n - 1], go to val.
DatasetManifest SplitPerPatient(std::vector<LesionRecord> records, double val_fraction, std::uint64_t seed);

// patient_id -> split map; throws if one patient spans several splits.
void CheckPatientDisjoint(const DatasetManifest& manifest);

// RFC-4180-style splitting with double-quote escapes.
std::vector<std::string> SplitCsvLine(std::string_view line);
std::string CsvEscape(std::string_view field);

// Columns: patient_id,image_id,view,x_min,y_min,x_max,y_max,label,source,split
std::string ManifestToCsv(const DatasetManifest& manifest);
DatasetManifest ManifestFromCsv(std::string_view text);
void WriteManifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest ReadManifest(const std::filesystem::path& path);

// "<image_id>_<x_min>_<y_min>.png"
std::string PatchFileName(const LesionRecord& record);

// Annotation table: patient_id,image_id,view,label,source[,split] followed by
// either a "contour" column ("x y;x y;...") or x_min,y_min,x_max,y_max.
std::vector<LesionRecord> ReadAnnotations(const std::filesystem::path& path);

}  // namespace mammodp::ingest

#endif  // MAMMODP_INGEST_MANIFEST_HPP_
