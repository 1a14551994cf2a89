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

#include "mammodp/nn/layers.hpp"

#include <random>

#include "mammodp/common/errors.hpp"
#include "mammodp/common/hash.hpp"

namespace mammodp::nn {

void InitNormal(Tensor& t, Rng& rng, double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  for (double& v : t.values()) v = dist(rng);
}

void InitUniform(Tensor& t, Rng& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
}

LinearLayer::LinearLayer(int in, int out, Rng& rng, double init_std)
    : weight(Tensor::Zeros({in, out}, true)), bias(Tensor::Zeros({out}, true)) {
  InitNormal(weight, rng, 0.0, init_std);
}

void LinearLayer::Collect(const std::string& prefix, StateList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Conv2dLayer::Conv2dLayer(int in, int out, int kernel, int stride_, int padding_, Rng& rng, double init_std,
                         bool with_bias)
    : weight(Tensor::Zeros({out, in, kernel, kernel}, true)), stride(stride_), padding(padding_) {
  InitNormal(weight, rng, 0.0, init_std);
  if (with_bias) bias = Tensor::Zeros({out}, true);
}

void Conv2dLayer::Collect(const std::string& prefix, StateList& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

ConvTranspose2dLayer::ConvTranspose2dLayer(int in, int out, int kernel, int stride_, int padding_, Rng& rng,
                                           double init_std, bool with_bias)
    : weight(Tensor::Zeros({in, out, kernel, kernel}, true)), stride(stride_), padding(padding_) {
  InitNormal(weight, rng, 0.0, init_std);
  if (with_bias) bias = Tensor::Zeros({out}, true);
}

void ConvTranspose2dLayer::Collect(const std::string& prefix, StateList& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

BatchNormLayer::BatchNormLayer(int channels, Rng& rng)
    : gamma(Tensor::Zeros({channels}, true)),
      beta(Tensor::Zeros({channels}, true)),
      running_mean(Tensor::Zeros({channels})),
      running_var(Tensor::Full({channels}, 1.0)) {
  InitNormal(gamma, rng, 1.0, 0.02);
}

Tensor BatchNormLayer::Forward(const Tensor& x, bool training) {
  BatchNormStats stats;
  stats.running_mean.assign(running_mean.values().begin(), running_mean.values().end());
  stats.running_var.assign(running_var.values().begin(), running_var.values().end());
  Tensor y = BatchNorm2d(x, gamma, beta, stats, training);
  if (training) {
    std::copy(stats.running_mean.begin(), stats.running_mean.end(), running_mean.values().begin());
    std::copy(stats.running_var.begin(), stats.running_var.end(), running_var.values().begin());
  }
  return y;
}

void BatchNormLayer::Collect(const std::string& prefix, StateList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
  out.push_back({prefix + ".running_mean", running_mean, true});
  out.push_back({prefix + ".running_var", running_var, true});
}

LayerNormLayer::LayerNormLayer(int dim)
    : gamma(Tensor::Full({dim}, 1.0, true)), beta(Tensor::Zeros({dim}, true)) {}

void LayerNormLayer::Collect(const std::string& prefix, StateList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

std::vector<Tensor> Parameters(const StateList& state) {
  std::vector<Tensor> out;
  for (const auto& entry : state) {
    if (!entry.buffer) out.push_back(entry.tensor);
  }
  return out;
}

std::vector<double> Flatten(const std::vector<Tensor>& tensors) {
  std::vector<double> flat;
  for (const auto& t : tensors) flat.insert(flat.end(), t.values().begin(), t.values().end());
  return flat;
}

void Unflatten(std::span<const double> flat, std::vector<Tensor>& tensors) {
  std::size_t offset = 0;
  for (auto& t : tensors) {
    if (offset + t.values().size() > flat.size()) throw ContractViolation("Unflatten: vector too short");
    std::copy_n(flat.begin() + offset, t.values().size(), t.values().begin());
    offset += t.values().size();
  }
  if (offset != flat.size()) throw ContractViolation("Unflatten: vector too long");
}

std::string StateDigest(const StateList& state) {
  std::string joined;
  for (const auto& entry : state) {
    joined += entry.name;
    joined += ':';
    joined += Sha256Hex(entry.tensor.values());
    joined += ';';
  }
  return Sha256Hex(joined);
}

void StoreState(const StateList& state, BlobContainer& out, const std::string& prefix) {
  for (const auto& entry : state) {
    const auto values = entry.tensor.values();
    out.blobs[prefix + entry.name] = Blob{entry.tensor.shape(), {values.begin(), values.end()}};
  }
}

void LoadState(const BlobContainer& in, StateList& state, const std::string& prefix) {
  for (auto& entry : state) {
    auto it = in.blobs.find(prefix + entry.name);
    if (it == in.blobs.end()) throw IoError("checkpoint is missing tensor '" + prefix + entry.name + "'");
    if (it->second.shape != entry.tensor.shape()) {
      throw IoError("tensor '" + prefix + entry.name + "' has shape " + ShapeString(it->second.shape) +
                    ", model expects " + ShapeString(entry.tensor.shape()));
    }
    std::copy(it->second.values.begin(), it->second.values.end(), entry.tensor.values().begin());
  }
}

}  // namespace mammodp::nn
