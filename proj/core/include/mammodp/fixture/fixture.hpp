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

#ifndef MAMMODP_FIXTURE_FIXTURE_HPP_
#define MAMMODP_FIXTURE_FIXTURE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mammodp/ingest/records.hpp"

namespace mammodp::fixture {

// Procedural stand-in for a mass cohort: benign lesions are smooth, round
// and low-contrast; malignant lesions are spiculated with fine texture.
// The external domain applies a fixed intensity/contrast/noise shift.
struct FixtureSpec {
  int n_patients = 16;
  int max_images_per_patient = 2;  // CC, then MLO
  int side = 128;
  std::uint64_t seed = 7;
  bool external_domain = false;
  std::string patient_prefix = "P";
};

ingest::MassPatch RenderPatch(int side, ingest::Label label, std::uint64_t seed, bool external_domain);

// Patients alternate labels; view CC first, MLO second.
std::vector<ingest::MassPatch> GeneratePatches(const FixtureSpec& spec);

// Writes "<prefix>_<n>.png" full-field images with one lesion each plus an
// annotation table with contour polygons, ready for the ingest pipeline.
struct MammogramFixture {
  std::filesystem::path images_dir;
  std::filesystem::path annotations;
};
MammogramFixture WriteMammogramFixture(const std::filesystem::path& dir, const FixtureSpec& spec, int canvas = 320);

}  // namespace mammodp::fixture

#endif  // MAMMODP_FIXTURE_FIXTURE_HPP_
