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

#include "mammodp/gan/model.hpp"

#include <random>

#include "mammodp/common/errors.hpp"
#include "mammodp/nn/ops.hpp"

namespace mammodp::gan {
namespace {

constexpr double kInitStd = 0.02;
constexpr int kBlocks = 5;

int Padding(int kernel) {
  if (kernel < 2 || kernel % 2 != 0) throw ContractViolation("GAN kernels must be even and >= 2");
  return (kernel - 2) / 2;
}

void CheckLabels(std::span<const int> labels, std::int64_t n) {
  if (static_cast<std::int64_t>(labels.size()) != n) throw ContractViolation("one label per sample is required");
  for (int l : labels) {
    if (l != 0 && l != 1) throw ContractViolation("GAN labels must be 0 (benign) or 1 (malignant)");
  }
}

std::vector<std::int64_t> ToIndex(std::span<const int> labels) { return {labels.begin(), labels.end()}; }

}  // namespace

Generator::Generator(const GanArchitecture& arch, Rng& rng)
    : arch_(arch), embedding_(nn::Tensor::Zeros({2, arch.embed_dim}, true)) {
  nn::InitNormal(embedding_, rng, 0.0, 1.0);
  embed_fc_ = nn::LinearLayer(arch.embed_dim, arch.noise_dim, rng, kInitStd);
  const int w = arch.base_width;
  project_ = nn::ConvTranspose2dLayer(2 * arch.noise_dim, 16 * w, 4, 1, 0, rng, kInitStd, false);
  project_bn_ = nn::BatchNormLayer(16 * w, rng);
  const int pad = Padding(arch.g_kernel);
  const int widths[kBlocks + 1] = {16 * w, 8 * w, 4 * w, 2 * w, w, 1};
  for (int b = 0; b < kBlocks; ++b) {
    const bool last = b == kBlocks - 1;
    up_.emplace_back(widths[b], widths[b + 1], arch.g_kernel, 2, pad, rng, kInitStd, last);
    if (!last) up_bn_.emplace_back(widths[b + 1], rng);
  }
}

nn::Tensor Generator::Forward(const nn::Tensor& z, std::span<const int> labels, bool training) {
  if (z.shape().size() != 2 || z.dim(1) != arch_.noise_dim) {
    throw ContractViolation("generator noise must be [N, " + std::to_string(arch_.noise_dim) + "], got " +
                            nn::ShapeString(z.shape()));
  }
  const std::int64_t n = z.dim(0);
  CheckLabels(labels, n);
  nn::Tensor cond = embed_fc_(nn::GatherRows(embedding_, ToIndex(labels)));
  nn::Tensor h = nn::Reshape(nn::ConcatCols(z, cond), {n, 2 * arch_.noise_dim, 1, 1});
  h = nn::Relu(project_bn_.Forward(project_(h), training));
  for (std::size_t b = 0; b < up_.size(); ++b) {
    h = up_[b](h);
    h = b + 1 < up_.size() ? nn::Relu(up_bn_[b].Forward(h, training)) : nn::Tanh(h);
  }
  return h;
}

void Generator::Collect(const std::string& prefix, nn::StateList& out) const {
  out.push_back({prefix + "embedding", embedding_});
  embed_fc_.Collect(prefix + "embed_fc", out);
  project_.Collect(prefix + "project", out);
  project_bn_.Collect(prefix + "project_bn", out);
  for (std::size_t b = 0; b < up_.size(); ++b) {
    up_[b].Collect(prefix + "up" + std::to_string(b), out);
    if (b < up_bn_.size()) up_bn_[b].Collect(prefix + "up_bn" + std::to_string(b), out);
  }
}

Discriminator::Discriminator(const GanArchitecture& arch, Rng& rng)
    : arch_(arch), embedding_(nn::Tensor::Zeros({2, arch.embed_dim}, true)) {
  nn::InitNormal(embedding_, rng, 0.0, 1.0);
  plane_fc_ = nn::LinearLayer(arch.embed_dim, kImageSide * kImageSide, rng, kInitStd);
  const int w = arch.base_width;
  const int pad = Padding(arch.d_kernel);
  const int widths[kBlocks + 1] = {2, w, 2 * w, 4 * w, 8 * w, 16 * w};
  for (int b = 0; b < kBlocks; ++b) {
    down_.emplace_back(widths[b], widths[b + 1], arch.d_kernel, 2, pad, rng, kInitStd, b == 0);
    if (b > 0) down_bn_.emplace_back(widths[b + 1], rng);
  }
  const int side = kImageSide >> kBlocks;
  head_ = nn::LinearLayer(16 * w * side * side, 1, rng, kInitStd);
}

nn::Tensor Discriminator::Forward(const nn::Tensor& x, std::span<const int> labels, bool training) {
  if (x.shape() != nn::Shape{x.dim(0), 1, kImageSide, kImageSide}) {
    throw ContractViolation("discriminator input must be [N, 1, 128, 128], got " + nn::ShapeString(x.shape()));
  }
  const std::int64_t n = x.dim(0);
  CheckLabels(labels, n);
  nn::Tensor plane = nn::Reshape(plane_fc_(nn::GatherRows(embedding_, ToIndex(labels))), {n, 1, kImageSide, kImageSide});
  nn::Tensor h = nn::ConcatChannels(x, plane);
  for (std::size_t b = 0; b < down_.size(); ++b) {
    h = down_[b](h);
    if (b > 0) h = down_bn_[b - 1].Forward(h, training);
    h = nn::LeakyRelu(h, arch_.leaky_slope);
  }
  h = nn::Reshape(h, {n, h.numel() / n});
  return head_(h);
}

void Discriminator::Collect(const std::string& prefix, nn::StateList& out) const {
  out.push_back({prefix + "embedding", embedding_});
  plane_fc_.Collect(prefix + "plane_fc", out);
  for (std::size_t b = 0; b < down_.size(); ++b) {
    down_[b].Collect(prefix + "down" + std::to_string(b), out);
    if (b > 0) down_bn_[b - 1].Collect(prefix + "down_bn" + std::to_string(b), out);
  }
  head_.Collect(prefix + "head", out);
}

GanModel::GanModel(const GanArchitecture& a, std::uint64_t seed) : arch(a) {
  if (a.noise_dim != kNoiseDim) throw ContractViolation("noise dimension is fixed at 100");
  if (a.embed_dim < 1 || a.base_width < 1) throw ContractViolation("embedding and width must be positive");
  Rng g_rng = MakeRng(seed, {0x6E7ULL});
  Rng d_rng = MakeRng(seed, {0xD15ULL});
  generator = Generator(a, g_rng);
  discriminator = Discriminator(a, d_rng);
}

nn::StateList GanModel::GeneratorState() const {
  nn::StateList s;
  generator.Collect("g.", s);
  return s;
}

nn::StateList GanModel::DiscriminatorState() const {
  nn::StateList s;
  discriminator.Collect("d.", s);
  return s;
}

nn::StateList GanModel::State() const {
  nn::StateList s = GeneratorState();
  discriminator.Collect("d.", s);
  return s;
}

std::string GanModel::Digest() const { return nn::StateDigest(State()); }

nn::Tensor SampleNoise(std::int64_t n, int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n) * dim);
  for (double& x : v) x = normal(rng);
  return nn::Tensor::FromData({n, dim}, std::move(v));
}

}  // namespace mammodp::gan
