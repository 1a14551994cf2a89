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

#ifndef MAMMODP_NN_OPS_HPP_
#define MAMMODP_NN_OPS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mammodp/nn/tensor.hpp"

namespace mammodp::nn {

// Elementwise (identical shapes).
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double s);

Tensor Relu(const Tensor& x);
Tensor LeakyRelu(const Tensor& x, double slope);
Tensor Tanh(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor Gelu(const Tensor& x);  // exact erf form

Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);

// a: [n, k], b: [k, m].
Tensor MatMul(const Tensor& a, const Tensor& b);
// x: [n, in], weight: [in, out], bias: [out] or undefined.
Tensor Linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor Reshape(const Tensor& x, Shape shape);
// x: [n, d] -> [idx.size(), d], out row i = x row idx[i].
Tensor GatherRows(const Tensor& x, std::vector<std::int64_t> idx);
// [n, d1] ++ [n, d2] -> [n, d1 + d2].
Tensor ConcatCols(const Tensor& a, const Tensor& b);
// [N, C1, H, W] ++ [N, C2, H, W] -> [N, C1 + C2, H, W].
Tensor ConcatChannels(const Tensor& a, const Tensor& b);
// [batch * group, d] -> [batch, d], averaging each group of consecutive rows.
Tensor GroupMeanRows(const Tensor& x, std::int64_t batch);

// x: [N, Cin, H, W]; weight: [Cout, Cin, k, k]; bias: [Cout] or undefined.
Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding);
// x: [N, Cin, H, W]; weight: [Cin, Cout, k, k]; bias: [Cout] or undefined.
// Output side is (H - 1) * stride - 2 * padding + k.
Tensor ConvTranspose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding);

struct BatchNormStats {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

// x: [N, C, H, W] (H = W = 1 allowed). Training mode normalizes with batch
// statistics and updates `stats`; eval mode uses the running statistics.
Tensor BatchNorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormStats& stats, bool training);

// Row-wise layer normalization of x: [n, d].
Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Multi-head self-attention inside fixed windows.
//   qkv:   [windows * tokens, 3 * channels], columns ordered (q | k | v), each
//          split into `heads` contiguous head slices.
//   bias_table: [(2w - 1)^2, heads] learnable relative position bias.
//   bias_index: tokens * tokens entries into bias_table rows.
//   mask:  empty, or windows_per_image * tokens * tokens additive entries.
// Returns [windows * tokens, channels].
Tensor WindowAttention(const Tensor& qkv, int heads, int tokens, const Tensor& bias_table,
                       const std::vector<std::int32_t>& bias_index, const std::vector<double>& mask,
                       int windows_per_image);

// Mean over the batch of label-smoothed cross entropy; logits [B, K].
Tensor SmoothedCrossEntropy(const Tensor& logits, std::span<const int> labels, double smoothing);

}  // namespace mammodp::nn

#endif  // MAMMODP_NN_OPS_HPP_
