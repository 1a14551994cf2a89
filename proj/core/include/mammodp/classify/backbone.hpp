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

#ifndef MAMMODP_CLASSIFY_BACKBONE_HPP_
#define MAMMODP_CLASSIFY_BACKBONE_HPP_

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/common/image.hpp"
#include "mammodp/common/rng.hpp"
#include "mammodp/nn/layers.hpp"

namespace mammodp::classify {

// Shifted-window transformer. The defaults are a reduced-width desk model;
// the full-size tiny variant is embed 96, depths {2, 2, 6, 2}, heads
// {3, 6, 12, 24}.
struct BackboneConfig {
  int image_side = 224;
  int patch = 4;
  int window = 7;
  int embed_dim = 12;
  std::vector<int> depths = {2, 2, 2, 2};
  std::vector<int> heads = {1, 2, 4, 8};
  int mlp_ratio = 4;
  std::uint64_t seed = 2024;  // weights stand-in when no file is supplied

  void Validate() const;
  int out_dim() const;                // channels after the last stage
  int out_tokens() const;             // tokens per image after the last stage
  nlohmann::json ToJson() const;
  static BackboneConfig FromJson(const nlohmann::json& j);
};

struct SwinBlock {
  int stage = 0;
  int dim = 0;
  int heads = 0;
  int resolution = 0;  // tokens per side
  int shift = 0;
  nn::LayerNormLayer norm1;
  nn::LinearLayer qkv;
  nn::Tensor bias_table;
  nn::LinearLayer proj;
  nn::LayerNormLayer norm2;
  nn::LinearLayer fc1;
  nn::LinearLayer fc2;

  void Collect(const std::string& prefix, nn::StateList& out) const;
};

struct PatchMerging {
  nn::LayerNormLayer norm;
  nn::LinearLayer reduction;  // no bias
  void Collect(const std::string& prefix, nn::StateList& out) const;
};

class WindowBackbone {
 public:
  WindowBackbone() = default;
  explicit WindowBackbone(const BackboneConfig& config);

  // images: [N, 3, side, side] CHW stacks. Returns last-stage tokens
  // [N * out_tokens, out_dim] before the terminal normalization.
  nn::Tensor Forward(const std::vector<ChannelImage>& images) const;
  void Collect(const std::string& prefix, nn::StateList& out) const;
  const BackboneConfig& config() const { return config_; }

 private:
  nn::Tensor Block(const SwinBlock& block, const nn::Tensor& x, std::int64_t batch) const;

  BackboneConfig config_;
  nn::LinearLayer patch_embed_;
  nn::LayerNormLayer embed_norm_;
  std::vector<std::vector<SwinBlock>> stages_;
  std::vector<PatchMerging> merges_;
  std::vector<std::int32_t> bias_index_;
  // Per-stage shift masks, [windows per image, T, T]; empty when unshifted.
  std::vector<std::vector<double>> masks_;
};

}  // namespace mammodp::classify

#endif  // MAMMODP_CLASSIFY_BACKBONE_HPP_
