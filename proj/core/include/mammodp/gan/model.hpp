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

#ifndef MAMMODP_GAN_MODEL_HPP_
#define MAMMODP_GAN_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mammodp/common/rng.hpp"
#include "mammodp/nn/layers.hpp"

namespace mammodp::gan {

inline constexpr int kNoiseDim = 100;
inline constexpr int kImageSide = 128;

struct GanArchitecture {
  int noise_dim = kNoiseDim;
  int embed_dim = 50;
  int base_width = 4;  // generator widths 16w, 8w, 4w, 2w, w; discriminator mirrors
  int g_kernel = 4;
  int d_kernel = 6;
  double leaky_slope = 0.2;
};

// z (100) is concatenated with a 100-d projection of the label embedding,
// projected to 4x4, and doubled five times to 128x128 with tanh output.
class Generator {
 public:
  Generator() = default;
  Generator(const GanArchitecture& arch, Rng& rng);

  // z: [N, noise_dim]; returns [N, 1, 128, 128] in [-1, 1].
  nn::Tensor Forward(const nn::Tensor& z, std::span<const int> labels, bool training);
  void Collect(const std::string& prefix, nn::StateList& out) const;

 private:
  GanArchitecture arch_;
  nn::Tensor embedding_;  // [2, embed_dim]
  nn::LinearLayer embed_fc_;
  nn::ConvTranspose2dLayer project_;
  nn::BatchNormLayer project_bn_;
  std::vector<nn::ConvTranspose2dLayer> up_;
  std::vector<nn::BatchNormLayer> up_bn_;  // one fewer than up_
};

// The label embedding is mapped to a 128x128 plane and stacked with the image
// as a second input channel; five stride-2 blocks reduce 128 to 4.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const GanArchitecture& arch, Rng& rng);

  // x: [N, 1, 128, 128]; returns logits [N, 1].
  nn::Tensor Forward(const nn::Tensor& x, std::span<const int> labels, bool training);
  void Collect(const std::string& prefix, nn::StateList& out) const;

 private:
  GanArchitecture arch_;
  nn::Tensor embedding_;  // [2, embed_dim]
  nn::LinearLayer plane_fc_;
  std::vector<nn::Conv2dLayer> down_;
  std::vector<nn::BatchNormLayer> down_bn_;  // blocks 2..5
  nn::LinearLayer head_;
};

struct GanModel {
  GanArchitecture arch;
  Generator generator;
  Discriminator discriminator;

  GanModel() = default;
  GanModel(const GanArchitecture& arch, std::uint64_t seed);

  nn::StateList GeneratorState() const;
  nn::StateList DiscriminatorState() const;
  nn::StateList State() const;  // "g." and "d." prefixed
  std::string Digest() const;
};

// Draws i.i.d. standard-normal noise [n, dim].
nn::Tensor SampleNoise(std::int64_t n, int dim, Rng& rng);

}  // namespace mammodp::gan

#endif  // MAMMODP_GAN_MODEL_HPP_
