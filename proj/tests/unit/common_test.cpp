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

#include <algorithm>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/container.hpp"
#include "mammodp/common/files.hpp"
#include "mammodp/common/hash.hpp"
#include "mammodp/common/image.hpp"
#include "mammodp/common/resample.hpp"
#include "mammodp/common/rng.hpp"

namespace mammodp {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mammodp_common_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Hash, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, FileMatchesBytes) {
  const fs::path dir = TempDir("hash");
  WriteFileAtomic(dir / "f.txt", "abc");
  EXPECT_EQ(Sha256File(dir / "f.txt"), Sha256Hex("abc"));
  EXPECT_EQ(ReadFile(dir / "f.txt"), "abc");
  EXPECT_FALSE(fs::exists(dir / "f.txt.tmp"));
}

TEST(Rng, DerivedStreamsAreStableAndDistinct) {
  EXPECT_EQ(DeriveSeed(1, {2, 3}), DeriveSeed(1, {2, 3}));
  EXPECT_NE(DeriveSeed(1, {2, 3}), DeriveSeed(1, {3, 2}));
  EXPECT_NE(DeriveSeed(1, {2}), DeriveSeed(2, {2}));
  Rng a = MakeRng(9, {1});
  a.discard(17);
  Rng b = DeserializeRng(SerializeRng(a));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(Container, RoundTripsBlobsAndMetadata) {
  const fs::path dir = TempDir("container");
  BlobContainer c;
  c.metadata = {{"epoch", 3}, {"name", "x"}};
  c.blobs["w"] = Blob{{2, 3}, {1, 2, 3, 4, 5, -6.5}};
  c.blobs["b"] = Blob{{1}, {1e-300}};
  c.Save(dir / "c.ckpt");
  const BlobContainer d = BlobContainer::Load(dir / "c.ckpt");
  EXPECT_EQ(d.metadata, c.metadata);
  ASSERT_EQ(d.blobs.size(), 2u);
  EXPECT_EQ(d.blobs.at("w").shape, c.blobs.at("w").shape);
  EXPECT_EQ(d.blobs.at("w").values, c.blobs.at("w").values);
  EXPECT_EQ(d.blobs.at("b").values, c.blobs.at("b").values);
}

TEST(Container, RejectsForeignFile) {
  const fs::path dir = TempDir("foreign");
  WriteFileAtomic(dir / "bad.ckpt", "not a checkpoint");
  EXPECT_THROW(BlobContainer::Load(dir / "bad.ckpt"), IoError);
}

TEST(Image, Png16RoundTripIsLossless) {
  const fs::path dir = TempDir("png");
  GrayImage img(7, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) img.at(x, y) = (x * 5 + y) / 65535.0 * 1000.0;
  WritePng16(dir / "a.png", img);
  const GrayImage back = ReadImage(dir / "a.png");
  ASSERT_EQ(back.width, 7);
  ASSERT_EQ(back.height, 5);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(back.pixels[i], img.pixels[i], 0.5 / 65535.0);
}

TEST(Image, FlipsAreInvolutions) {
  GrayImage img(3, 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<double>(i);
  EXPECT_EQ(FlipHorizontal(img).at(0, 0), img.at(2, 0));
  EXPECT_EQ(FlipVertical(img).at(0, 0), img.at(0, 1));
  EXPECT_EQ(FlipHorizontal(FlipHorizontal(img)), img);
  EXPECT_EQ(FlipVertical(FlipVertical(img)), img);
}

TEST(Resample, IdentityAndConstants) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  GrayImage img(31, 31);
  for (auto& p : img.pixels) p = u(rng);
  EXPECT_EQ(Resample(img, 31, 31), img);
  const GrayImage flat(97, 97, 0.37);
  for (int side : {13, 97, 224, 301}) {
    const GrayImage r = Resample(flat, side, side);
    for (double p : r.pixels) EXPECT_NEAR(p, 0.37, 1e-15);
  }
}

TEST(Resample, TwoToOneIsBlockAverage) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  GrayImage img(8, 8);
  for (auto& p : img.pixels) p = u(rng);
  const GrayImage r = Resample(img, 4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double avg =
          (img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) + img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1)) /
          4.0;
      EXPECT_NEAR(r.at(x, y), avg, 1e-14);
    }
  }
}

TEST(Resample, NeverWidensRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 0.6);
  GrayImage img(50, 50);
  for (auto& p : img.pixels) p = u(rng);
  for (int side : {17, 128, 224}) {
    const GrayImage r = Resample(img, side, side);
    const auto [lo, hi] = std::minmax_element(r.pixels.begin(), r.pixels.end());
    EXPECT_GE(*lo, 0.2 - 1e-12);
    EXPECT_LE(*hi, 0.6 + 1e-12);
  }
}

TEST(Resample, CropRejectsOutside) {
  const GrayImage img(10, 10, 1.0);
  EXPECT_EQ(Crop(img, 2, 3, 4, 5).width, 4);
  EXPECT_THROW(Crop(img, 8, 0, 4, 4), ContractViolation);
}

}  // namespace
}  // namespace mammodp
