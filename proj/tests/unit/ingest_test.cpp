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

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "mammodp/common/image.hpp"
#include "mammodp/fixture/fixture.hpp"
#include "mammodp/ingest/geometry.hpp"
#include "mammodp/ingest/manifest.hpp"
#include "mammodp/ingest/pipeline.hpp"
#include "mammodp/ingest/records.hpp"
#include "oracles/geometry_property.hpp"
#include "oracles/window_oracle.hpp"

namespace mammodp::ingest {
namespace {

namespace fs = std::filesystem;

std::vector<LesionRecord> Patients(int n, int images_each = 1) {
  std::vector<LesionRecord> out;
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < images_each; ++k) {
      LesionRecord r;
      r.patient_id = "P" + std::to_string(p);
      r.image_id = r.patient_id + (k == 0 ? "_CC" : "_MLO");
      r.view = k == 0 ? View::kCC : View::kMLO;
      r.box = BoundingBox{10, 10, 40, 50};
      r.label = p % 2 ? Label::kMalignant : Label::kBenign;
      out.push_back(r);
    }
  }
  return out;
}

TEST(BoundingBox, TriangleHull) {
  const std::vector<Point> tri = {{10, 10}, {20, 10}, {15, 30}};
  EXPECT_EQ(ComputeBoundingBox(tri), (BoundingBox{10, 10, 20, 30}));
}

TEST(BoundingBox, DegenerateAndShortContoursAreRejected) {
  const std::vector<Point> same = {{5, 5}, {5, 5}, {5, 5}};
  EXPECT_THROW(ComputeBoundingBox(same), MalformedContourError);
  const std::vector<Point> line = {{1, 5}, {3, 5}, {9, 5}};
  EXPECT_THROW(ComputeBoundingBox(line), MalformedContourError);
  const std::vector<Point> two = {{1, 1}, {4, 4}};
  EXPECT_THROW(ComputeBoundingBox(two), MalformedContourError);
}

TEST(BoundingBox, RandomPolygonMatchesCoordinateScan) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> c(-500, 500);
  std::vector<Point> poly(100);
  for (auto& p : poly) p = {c(rng), c(rng)};
  int x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  EXPECT_EQ(ComputeBoundingBox(poly), (BoundingBox{x0, y0, x1, y1}));
}

TEST(SquareWindow, HandComputedExample) {
  const SquareWindow w = SquareWindowFor({100, 200, 140, 230});
  EXPECT_EQ(w.side, 160);
  EXPECT_EQ(2 * w.x0 + w.side, 2 * 120);
  EXPECT_EQ(2 * w.y0 + w.side, 2 * 215);
}

TEST(SquareWindow, MinimumSideFloorAndPadding) {
  GrayImage img(300, 300, 0.6);
  const GrayImage patch = ExtractSquare(img, {0, 0, 8, 8}, 0);
  ASSERT_EQ(patch.width, 128);
  ASSERT_EQ(patch.height, 128);
  const SquareWindow w = SquareWindowFor({0, 0, 8, 8}, 0);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      const bool inside = w.x0 + x >= 0 && w.y0 + y >= 0;
      EXPECT_EQ(patch.at(x, y), inside ? 0.6 : 0.0);
    }
  }
}

TEST(SquareWindow, CenteredBoxIsSymmetric) {
  GrayImage img(400, 400);
  for (int y = 0; y < 400; ++y)
    for (int x = 0; x < 400; ++x) img.at(x, y) = std::abs(x - 200) * 0.001 + std::abs(y - 200) * 0.0001;
  const BoundingBox box{180, 180, 220, 220};
  const GrayImage patch = ExtractSquare(img, box);
  const auto w = oracle::SquareWindow(180, 180, 220, 220, 60, 128);
  ASSERT_EQ(patch.width, w.side);
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      EXPECT_EQ(patch.at(x, y), oracle::PatchPixel(w, x, y, 400, 400, [&](long a, long b) { return img.at(a, b); }));
    }
  }
  // With an even side centered on a 200-px axis, column c mirrors column side - c.
  for (int x = 1; x < patch.width; ++x) EXPECT_EQ(patch.at(x, 80), patch.at(patch.width - x, 80));
}

TEST(SquareWindow, BoxOutsideImageIsOutOfBounds) {
  GrayImage img(100, 100, 0.5);
  EXPECT_THROW(ExtractSquare(img, {150, 150, 170, 170}), OutOfBoundsError);
}

TEST(SquareWindow, RandomizedCasesAgainstIndexOracle) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(oracle::CheckGeometryCase(rng), "") << "case " << i;
}

TEST(Normalize, MinMaxAndConstant) {
  GrayImage img(2, 2);
  img.pixels = {0.2, 0.4, 0.6, 0.3};
  const GrayImage n = NormalizeIntensity(img);
  EXPECT_DOUBLE_EQ(n.pixels[0], 0.0);
  EXPECT_DOUBLE_EQ(n.pixels[2], 1.0);
  EXPECT_DOUBLE_EQ(n.pixels[1], 0.5);
  for (double v : NormalizeIntensity(GrayImage(3, 3, 0.7)).pixels) EXPECT_EQ(v, 0.0);
}

TEST(Resize, IdentityConstantAndCheckerboard) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  GrayImage img(224, 224);
  for (auto& p : img.pixels) p = u(rng);
  const ChannelImage same = ResizeForClassifier(img);
  ASSERT_EQ(same.channels, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 224; ++y)
      for (int x = 0; x < 224; ++x) ASSERT_EQ(same.at(c, x, y), img.at(x, y));

  for (double v : ResizeForClassifier(GrayImage(448, 448, 0.3)).data) EXPECT_NEAR(v, 0.3, 1e-15);

  GrayImage board(448, 448);
  for (int y = 0; y < 448; ++y)
    for (int x = 0; x < 448; ++x) board.at(x, y) = (x + y) % 2;
  for (double v : ResizeForClassifier(board).data) EXPECT_NEAR(v, 0.5, 1e-15);

  EXPECT_THROW(ResizeForClassifier(GrayImage(10, 12)), ContractViolation);
}

TEST(Split, TenPatientsTwoInValidation) {
  const auto m = SplitPerPatient(Patients(10), 0.2, 5);
  std::set<std::string> val;
  for (std::size_t i : m.Indices(Split::kVal)) val.insert(m.records[i].patient_id);
  EXPECT_EQ(val.size(), 2u);
  EXPECT_EQ(SplitPerPatient(Patients(10), 0.2, 5).splits, m.splits);
}

TEST(Split, BothViewsOfAPatientStayTogether) {
  const auto m = SplitPerPatient(Patients(12, 2), 0.25, 3);
  for (std::size_t i = 0; i < m.size(); i += 2) EXPECT_EQ(m.splits[i], m.splits[i + 1]);
  EXPECT_NO_THROW(CheckPatientDisjoint(m));
}

TEST(Split, PredefinedTestSplitIsKept) {
  auto records = Patients(8);
  records[0].predefined_split = Split::kTest;
  records[5].predefined_split = Split::kTest;
  const auto m = SplitPerPatient(records, 0.3, 1);
  EXPECT_EQ(m.splits[0], Split::kTest);
  EXPECT_EQ(m.splits[5], Split::kTest);
  EXPECT_EQ(m.Indices(Split::kTest).size(), 2u);
}

TEST(Split, DisjointForManySeeds) {
  const auto records = Patients(30, 2);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto m = SplitPerPatient(records, 0.2, seed);
    std::map<std::string, std::set<Split>> seen;
    for (std::size_t i = 0; i < m.size(); ++i) seen[m.records[i].patient_id].insert(m.splits[i]);
    for (const auto& [pid, splits] : seen) EXPECT_EQ(splits.size(), 1u) << pid << " seed " << seed;
  }
}

TEST(Split, InvalidInputs) {
  EXPECT_THROW(SplitPerPatient({}, 0.2, 0), EmptyInputError);
  EXPECT_THROW(SplitPerPatient(Patients(3), 0.0, 0), ContractViolation);
}

TEST(Manifest, CsvRoundTrip) {
  auto records = Patients(4, 2);
  records[1].patient_id = "P,\"quoted\"";
  records[0].source = Source::kBcdr;
  const auto m = SplitPerPatient(records, 0.25, 2);
  const auto back = ManifestFromCsv(ManifestToCsv(m));
  ASSERT_EQ(back.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(back.records[i].patient_id, m.records[i].patient_id);
    EXPECT_EQ(back.records[i].image_id, m.records[i].image_id);
    EXPECT_EQ(back.records[i].view, m.records[i].view);
    EXPECT_EQ(back.records[i].box, m.records[i].box);
    EXPECT_EQ(back.records[i].label, m.records[i].label);
    EXPECT_EQ(back.records[i].source, m.records[i].source);
    EXPECT_EQ(back.splits[i], m.splits[i]);
  }
  EXPECT_THROW(ManifestFromCsv(""), IoError);
}

TEST(Manifest, PatchFileName) {
  LesionRecord r;
  r.image_id = "IMG_7";
  r.box = BoundingBox{12, 34, 50, 60};
  EXPECT_EQ(PatchFileName(r), "IMG_7_12_34.png");
}

TEST(Pipeline, IngestsProceduralMammograms) {
  const fs::path dir = fs::temp_directory_path() / "mammodp_ingest_pipeline";
  fs::remove_all(dir);
  fixture::FixtureSpec spec;
  spec.n_patients = 6;
  const auto fx = fixture::WriteMammogramFixture(dir / "raw", spec, 320);
  IngestOptions opt;
  opt.images_dir = fx.images_dir;
  opt.annotations = fx.annotations;
  opt.out_dir = dir / "patches";
  opt.val_fraction = 0.2;
  const std::size_t expected = fixture::GeneratePatches(spec).size();
  ASSERT_GT(expected, 6u);
  const IngestResult result = IngestDataset(opt);
  EXPECT_TRUE(result.rejected.empty());
  ASSERT_EQ(result.manifest.size(), expected);
  EXPECT_NO_THROW(CheckPatientDisjoint(result.manifest));
  const auto patches = LoadPatches(opt.out_dir / "manifest.csv");
  ASSERT_EQ(patches.size(), expected);
  for (const auto& p : patches) {
    EXPECT_NO_THROW(ValidatePatch(p));
    EXPECT_TRUE(fs::exists(opt.out_dir / PatchFileName(p.provenance)));
  }
}

}  // namespace
}  // namespace mammodp::ingest
