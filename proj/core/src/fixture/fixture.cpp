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

#include "mammodp/fixture/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "mammodp/common/files.hpp"
#include "mammodp/common/image.hpp"
#include "mammodp/common/rng.hpp"

namespace mammodp::fixture {
namespace {

constexpr double kPi = std::numbers::pi;

struct Lesion {
  double cx, cy, radius;
  int spikes;
  double spike_depth, phase;
  bool malignant;

  double RadiusAt(double theta) const {
    if (!malignant) return radius * (1.0 + 0.08 * std::sin(2.0 * theta + phase));
    return radius * (1.0 + spike_depth * std::pow(std::abs(std::sin(spikes * theta / 2.0 + phase)), 6.0));
  }
};

// Parenchyma-like background from a handful of random low-frequency waves.
void PaintBackground(GrayImage& img, Rng& rng, double base) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Wave { double fx, fy, phase, amp; };
  std::vector<Wave> waves(6);
  for (auto& w : waves) w = {u(rng) * 0.08, u(rng) * 0.08, u(rng) * 2 * kPi, 0.02 + 0.04 * u(rng)};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = base;
      for (const auto& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
      img.at(x, y) = v;
    }
  }
}

void PaintLesion(GrayImage& img, const Lesion& lesion, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double fine_freq = lesion.malignant ? 0.9 + 0.3 * u(rng) : 0.25;
  const double fine_amp = lesion.malignant ? 0.08 : 0.02;
  const double gain = lesion.malignant ? 0.42 : 0.30;
  const double fp = u(rng) * 2 * kPi;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - lesion.cx, dy = y - lesion.cy;
      const double r = std::hypot(dx, dy);
      const double edge = lesion.RadiusAt(std::atan2(dy, dx));
      const double softness = lesion.malignant ? 1.5 : 4.0;
      const double inside = 1.0 / (1.0 + std::exp((r - edge) / softness));
      const double texture = fine_amp * std::sin(fine_freq * x + fp) * std::cos(fine_freq * y - fp);
      img.at(x, y) += inside * (gain + texture);
    }
  }
}

void Finish(GrayImage& img, Rng& rng, bool external_domain) {
  std::normal_distribution<double> noise(0.0, external_domain ? 0.04 : 0.015);
  for (double& v : img.pixels) {
    double s = v + noise(rng);
    if (external_domain) s = 0.15 + 0.7 * std::pow(std::clamp(s, 0.0, 1.0), 0.6);
    v = std::clamp(s, 0.0, 1.0);
  }
}

Lesion DrawLesion(Rng& rng, double cx, double cy, double min_r, double max_r, bool malignant) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> spikes(5, 9);
  return Lesion{cx, cy, min_r + (max_r - min_r) * u(rng), spikes(rng), 0.35 + 0.25 * u(rng), u(rng) * 2 * kPi,
                malignant};
}

std::string PatientId(const FixtureSpec& spec, int p) {
  std::ostringstream os;
  os << spec.patient_prefix << std::setw(4) << std::setfill('0') << p;
  return os.str();
}

ingest::Source SourceFor(const FixtureSpec& spec) {
  return spec.external_domain ? ingest::Source::kBcdr : ingest::Source::kFixture;
}

int ImagesFor(const FixtureSpec& spec, int patient) {
  Rng rng = MakeRng(spec.seed, {0x1A6E5ULL, static_cast<std::uint64_t>(patient)});
  std::uniform_int_distribution<int> n(1, std::max(1, spec.max_images_per_patient));
  return n(rng);
}

}  // namespace

ingest::MassPatch RenderPatch(int side, ingest::Label label, std::uint64_t seed, bool external_domain) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(side, side);
  PaintBackground(img, rng, 0.22 + 0.1 * u(rng));
  const double c = side / 2.0;
  const bool malignant = label == ingest::Label::kMalignant;
  const Lesion lesion = DrawLesion(rng, c + (u(rng) - 0.5) * side * 0.1, c + (u(rng) - 0.5) * side * 0.1,
                                   side * 0.14, side * 0.24, malignant);
  PaintLesion(img, lesion, rng);
  Finish(img, rng, external_domain);
  ingest::MassPatch patch;
  patch.pixels = std::move(img);
  patch.label = label;
  return patch;
}

std::vector<ingest::MassPatch> GeneratePatches(const FixtureSpec& spec) {
  if (spec.n_patients < 1 || spec.side < 1) throw ContractViolation("fixture needs patients and a positive side");
  std::vector<ingest::MassPatch> out;
  for (int p = 0; p < spec.n_patients; ++p) {
    const auto label = p % 2 == 0 ? ingest::Label::kBenign : ingest::Label::kMalignant;
    const int n_images = ImagesFor(spec, p);
    for (int v = 0; v < n_images; ++v) {
      auto patch = RenderPatch(spec.side, label,
                               DeriveSeed(spec.seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(v)}),
                               spec.external_domain);
      auto& rec = patch.provenance;
      rec.patient_id = PatientId(spec, p);
      rec.image_id = rec.patient_id + (v == 0 ? "_CC" : "_MLO");
      rec.view = v == 0 ? ingest::View::kCC : ingest::View::kMLO;
      rec.label = label;
      rec.source = SourceFor(spec);
      rec.box = ingest::BoundingBox{0, 0, spec.side, spec.side};
      out.push_back(std::move(patch));
    }
  }
  return out;
}

MammogramFixture WriteMammogramFixture(const std::filesystem::path& dir, const FixtureSpec& spec, int canvas) {
  MammogramFixture fx{dir / "images", dir / "annotations.csv"};
  std::filesystem::create_directories(fx.images_dir);
  std::ostringstream csv;
  csv << "patient_id,image_id,view,label,source,split,contour\n";
  for (int p = 0; p < spec.n_patients; ++p) {
    const auto label = p % 2 == 0 ? ingest::Label::kBenign : ingest::Label::kMalignant;
    const bool test = p % 5 == 4;
    const int n_images = ImagesFor(spec, p);
    for (int v = 0; v < n_images; ++v) {
      Rng rng = MakeRng(spec.seed, {0xA11ULL, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(v)});
      std::uniform_real_distribution<double> u(0.0, 1.0);
      GrayImage img(canvas, canvas);
      PaintBackground(img, rng, 0.2 + 0.1 * u(rng));
      const bool malignant = label == ingest::Label::kMalignant;
      // Lesions may sit near the border so the padding path is exercised.
      const Lesion lesion = DrawLesion(rng, canvas * (0.1 + 0.8 * u(rng)), canvas * (0.1 + 0.8 * u(rng)),
                                       canvas * 0.04, canvas * 0.09, malignant);
      PaintLesion(img, lesion, rng);
      Finish(img, rng, spec.external_domain);
      const std::string patient = PatientId(spec, p);
      const std::string image_id = patient + (v == 0 ? "_CC" : "_MLO");
      WritePng16(fx.images_dir / (image_id + ".png"), img);
      csv << patient << ',' << image_id << ',' << (v == 0 ? "CC" : "MLO") << ',' << ingest::ToString(label) << ','
          << ingest::ToString(SourceFor(spec)) << ',' << (test ? "test" : "") << ',';
      for (int k = 0; k < 24; ++k) {
        const double theta = 2 * kPi * k / 24.0;
        const double r = lesion.RadiusAt(theta);
        const long x = std::lround(std::clamp(lesion.cx + r * std::cos(theta), 0.0, canvas - 1.0));
        const long y = std::lround(std::clamp(lesion.cy + r * std::sin(theta), 0.0, canvas - 1.0));
        csv << (k ? ";" : "") << x << ' ' << y;
      }
      csv << '\n';
    }
  }
  WriteFileAtomic(fx.annotations, csv.str());
  return fx;
}

}  // namespace mammodp::fixture
