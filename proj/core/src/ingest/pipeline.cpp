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

#include "mammodp/ingest/pipeline.hpp"

#include <map>

#include "mammodp/common/image.hpp"

namespace mammodp::ingest {

std::filesystem::path LocateImage(const std::filesystem::path& dir, const std::string& image_id) {
  for (const char* ext : {".png", ".pgm"}) {
    auto candidate = dir / (image_id + ext);
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw IoError("no image file for '" + image_id + "' in " + dir.string());
}

IngestResult IngestDataset(const IngestOptions& options) {
  std::vector<LesionRecord> records = ReadAnnotations(options.annotations);
  IngestResult result;
  std::vector<LesionRecord> kept;
  std::vector<MassPatch> patches;
  std::map<std::string, GrayImage> cache;
  for (auto& record : records) {
    try {
      auto it = cache.find(record.image_id);
      if (it == cache.end()) {
        GrayImage raw = ReadImage(LocateImage(options.images_dir, record.image_id));
        it = cache.emplace(record.image_id, NormalizeIntensity(raw)).first;
      }
      MassPatch patch = ExtractSquarePatch(it->second, record, options.margin_px, options.min_side);
      ValidatePatch(patch, options.min_side);
      kept.push_back(patch.provenance);
      patches.push_back(std::move(patch));
    } catch (const MalformedContourError& e) {
      result.rejected.push_back({record.image_id, e.what()});
    } catch (const OutOfBoundsError& e) {
      result.rejected.push_back({record.image_id, e.what()});
    }
  }
  if (kept.empty()) throw EmptyInputError("no usable lesion records in " + options.annotations.string());
  result.manifest = SplitPerPatient(std::move(kept), options.val_fraction, options.seed);
  WritePatchArchive(options.out_dir, patches, result.manifest.splits);
  return result;
}

void WritePatchArchive(const std::filesystem::path& dir, const std::vector<MassPatch>& patches,
                       const std::vector<Split>& splits) {
  if (patches.size() != splits.size()) throw ContractViolation("one split per patch is required");
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    LesionRecord record = patches[i].provenance;
    record.label = patches[i].label;
    if (!record.box) record.box = BoundingBox{0, 0, patches[i].side(), patches[i].side()};
    WritePng16(dir / PatchFileName(record), patches[i].pixels);
    manifest.records.push_back(std::move(record));
    manifest.splits.push_back(splits[i]);
  }
  WriteManifest(dir / "manifest.csv", manifest);
}

std::vector<MassPatch> LoadPatches(const std::filesystem::path& manifest_path, std::optional<Split> only) {
  const DatasetManifest manifest = ReadManifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  std::vector<MassPatch> patches;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (only && manifest.splits[i] != *only) continue;
    MassPatch p;
    p.provenance = manifest.records[i];
    p.label = p.provenance.label;
    p.synthetic = p.provenance.source == Source::kSynthetic;
    p.pixels = ReadImage(dir / PatchFileName(p.provenance));
    if (!p.pixels.square()) throw IoError("patch file is not square: " + PatchFileName(p.provenance));
    patches.push_back(std::move(p));
  }
  return patches;
}

}  // namespace mammodp::ingest
