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

#include "mammodp/eval/extractors.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "mammodp/common/resample.hpp"
#include "mammodp/common/rng.hpp"
#include "mammodp/eval/radiomics.hpp"
#include "mammodp/nn/layers.hpp"
#include "mammodp/nn/ops.hpp"

namespace mammodp::eval {
namespace {

struct ConvEmbedderSpec {
  std::string name;
  std::uint64_t seed;
  int input_side;
  int kernel;
  std::vector<int> widths;
};

// Fixed random convolutions with ReLU; the embedding concatenates the
// spatial mean and standard deviation of the last feature map.
class ConvEmbedder final : public FeatureExtractor {
 public:
  explicit ConvEmbedder(ConvEmbedderSpec spec) : spec_(std::move(spec)) {
    Rng rng = MakeRng(spec_.seed);
    int in = 1;
    for (int w : spec_.widths) {
      const double fan_in = static_cast<double>(in * spec_.kernel * spec_.kernel);
      layers_.emplace_back(in, w, spec_.kernel, 2, spec_.kernel / 2, rng, std::sqrt(2.0 / fan_in), true);
      in = w;
    }
  }

  std::string name() const override { return spec_.name; }
  std::size_t dim() const override { return 2 * static_cast<std::size_t>(spec_.widths.back()); }

  std::vector<double> ExtractOne(const GrayImage& image) const override {
    nn::NoGradGuard no_grad;
    const GrayImage resized = Resample(image, spec_.input_side, spec_.input_side);
    std::vector<double> centered(resized.pixels.size());
    for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = 2.0 * resized.pixels[i] - 1.0;
    nn::Tensor x = nn::Tensor::FromData({1, 1, spec_.input_side, spec_.input_side}, std::move(centered));
    for (const auto& layer : layers_) x = nn::Relu(layer(x));
    const auto channels = x.dim(1);
    const auto plane = x.dim(2) * x.dim(3);
    std::vector<double> out(dim());
    for (std::int64_t c = 0; c < channels; ++c) {
      const double* p = x.data() + c * plane;
      double mean = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) mean += p[i];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) var += (p[i] - mean) * (p[i] - mean);
      out[c] = mean;
      out[channels + c] = std::sqrt(var / static_cast<double>(plane));
    }
    return out;
  }

 private:
  ConvEmbedderSpec spec_;
  std::vector<nn::Conv2dLayer> layers_;
};

class RadiomicsExtractor final : public FeatureExtractor {
 public:
  std::string name() const override { return "radiomics"; }
  std::size_t dim() const override { return RadiomicsFeatureNames().size(); }
  std::vector<double> ExtractOne(const GrayImage& image) const override { return RadiomicsFeatures(image); }
};

struct Registry {
  std::mutex mu;
  std::map<std::string, ExtractorFactory> factories;

  Registry() {
    factories["img-surrogate"] = [] {
      return std::make_unique<ConvEmbedder>(ConvEmbedderSpec{"img-surrogate", 0x1A6E5EEDULL, 64, 3, {8, 16, 32}});
    };
    factories["rad-surrogate"] = [] {
      return std::make_unique<ConvEmbedder>(ConvEmbedderSpec{"rad-surrogate", 0x4AD1A7EULL, 128, 5, {8, 16, 16, 32}});
    };
    factories["radiomics"] = [] { return std::make_unique<RadiomicsExtractor>(); };
  }
};

Registry& GetRegistry() {
  static Registry registry;
  return registry;
}

}  // namespace

FeatureMatrix FeatureExtractor::Extract(std::span<const GrayImage> images) const {
  FeatureMatrix m(images.size(), dim());
  for (std::size_t r = 0; r < images.size(); ++r) {
    const auto f = ExtractOne(images[r]);
    if (f.size() != m.cols) throw ContractViolation("extractor '" + name() + "' changed its output width");
    std::copy(f.begin(), f.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
  }
  return m;
}

std::unique_ptr<FeatureExtractor> MakeExtractor(const std::string& name) {
  Registry& reg = GetRegistry();
  std::lock_guard lock(reg.mu);
  auto it = reg.factories.find(name);
  if (it == reg.factories.end()) throw MissingExtractorError("no feature extractor backend named '" + name + "'");
  return it->second();
}

void RegisterExtractor(const std::string& name, ExtractorFactory factory) {
  Registry& reg = GetRegistry();
  std::lock_guard lock(reg.mu);
  reg.factories[name] = std::move(factory);
}

std::vector<std::string> ExtractorNames() {
  Registry& reg = GetRegistry();
  std::lock_guard lock(reg.mu);
  std::vector<std::string> names;
  for (const auto& [name, f] : reg.factories) names.push_back(name);
  return names;
}

}  // namespace mammodp::eval
