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

#ifndef MAMMODP_NN_LAYERS_HPP_
#define MAMMODP_NN_LAYERS_HPP_

#include <string>
#include <vector>

#include "mammodp/common/container.hpp"
#include "mammodp/common/rng.hpp"
#include "mammodp/nn/ops.hpp"
#include "mammodp/nn/tensor.hpp"

namespace mammodp::nn {

// A named parameter or buffer. Buffers are state (running statistics) that
// is persisted but never handed to an optimizer.
struct NamedTensor {
  std::string name;
  Tensor tensor;
  bool buffer = false;
};

using StateList = std::vector<NamedTensor>;

void InitNormal(Tensor& t, Rng& rng, double mean, double stddev);
void InitUniform(Tensor& t, Rng& rng, double bound);

struct LinearLayer {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]

  LinearLayer() = default;
  LinearLayer(int in, int out, Rng& rng, double init_std);
  Tensor operator()(const Tensor& x) const { return Linear(x, weight, bias); }
  void Collect(const std::string& prefix, StateList& out) const;
};

struct Conv2dLayer {
  Tensor weight;  // [out, in, k, k]
  Tensor bias;
  int stride = 1;
  int padding = 0;

  Conv2dLayer() = default;
  Conv2dLayer(int in, int out, int kernel, int stride, int padding, Rng& rng, double init_std, bool with_bias);
  Tensor operator()(const Tensor& x) const { return Conv2d(x, weight, bias, stride, padding); }
  void Collect(const std::string& prefix, StateList& out) const;
};

struct ConvTranspose2dLayer {
  Tensor weight;  // [in, out, k, k]
  Tensor bias;
  int stride = 1;
  int padding = 0;

  ConvTranspose2dLayer() = default;
  ConvTranspose2dLayer(int in, int out, int kernel, int stride, int padding, Rng& rng, double init_std,
                       bool with_bias);
  Tensor operator()(const Tensor& x) const { return ConvTranspose2d(x, weight, bias, stride, padding); }
  void Collect(const std::string& prefix, StateList& out) const;
};

struct BatchNormLayer {
  Tensor gamma;
  Tensor beta;
  // Running statistics are mirrored into these buffers for persistence.
  Tensor running_mean;
  Tensor running_var;

  BatchNormLayer() = default;
  BatchNormLayer(int channels, Rng& rng);
  Tensor Forward(const Tensor& x, bool training);
  void Collect(const std::string& prefix, StateList& out) const;
};

struct LayerNormLayer {
  Tensor gamma;
  Tensor beta;

  LayerNormLayer() = default;
  explicit LayerNormLayer(int dim);
  Tensor operator()(const Tensor& x) const { return LayerNorm(x, gamma, beta); }
  void Collect(const std::string& prefix, StateList& out) const;
};

// Parameter-set helpers shared by the model types.
std::vector<Tensor> Parameters(const StateList& state);
std::vector<double> Flatten(const std::vector<Tensor>& tensors);
void Unflatten(std::span<const double> flat, std::vector<Tensor>& tensors);
std::string StateDigest(const StateList& state);
void StoreState(const StateList& state, BlobContainer& out, const std::string& prefix = "");
// Throws IoError naming the first missing or shape-incompatible entry.
void LoadState(const BlobContainer& in, StateList& state, const std::string& prefix = "");

}  // namespace mammodp::nn

#endif  // MAMMODP_NN_LAYERS_HPP_
