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

#ifndef MAMMODP_CLASSIFY_MODEL_HPP_
#define MAMMODP_CLASSIFY_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mammodp/classify/backbone.hpp"
#include "mammodp/common/container.hpp"
#include "mammodp/ingest/records.hpp"

namespace mammodp::classify {

inline constexpr int kNumClasses = 2;

enum class TrainablePolicy { kHeadOnly, kLastTwoLayers, kAllParams };
std::string ToString(TrainablePolicy p);

// State names are "backbone.*", "norm.*" (terminal normalization) and
// "head.*". A policy resolves to a list of name prefixes.
std::vector<std::string> PolicyPrefixes(TrainablePolicy policy,
                                        const std::vector<std::string>& last_layers = {"norm.", "head."});

class ClassifierModel {
 public:
  ClassifierModel() = default;

  nn::Tensor Logits(const std::vector<ChannelImage>& images) const;
  // tokens: [batch * out_tokens, out_dim] from the backbone.
  nn::Tensor LogitsFromTokens(const nn::Tensor& tokens, std::int64_t batch) const;

  nn::StateList State() const;
  // Parameters selected by the trainable prefixes; everything else is frozen.
  nn::StateList TrainableState() const;
  std::size_t TrainableCount() const;
  std::size_t ParameterCount() const;
  std::string Digest() const;
  std::string BackboneDigest() const;
  // True when no backbone parameter is trainable, so backbone tokens can be
  // computed once and reused.
  bool FrozenBackbone() const;

  // Also switches autodiff off for every parameter outside the selection.
  void SetTrainable(std::vector<std::string> prefixes);
  const std::vector<std::string>& trainable_prefixes() const { return trainable_prefixes_; }
  const BackboneConfig& backbone_config() const { return backbone_.config(); }
  const WindowBackbone& backbone() const { return backbone_; }

  friend ClassifierModel BuildClassifier(const BackboneConfig& config, const BlobContainer* weights,
                                         std::uint64_t head_seed, std::vector<std::string> trainable);

 private:
  WindowBackbone backbone_;
  nn::LayerNormLayer norm_;
  nn::LinearLayer head_;
  std::vector<std::string> trainable_prefixes_;
};

// Backbone and terminal norm come from `weights` when given (a container
// holding "backbone.*"/"norm.*" blobs), else from the config seed. The head
// is always freshly initialized with 2 outputs from head_seed.
ClassifierModel BuildClassifier(const BackboneConfig& config, const BlobContainer* weights, std::uint64_t head_seed,
                                std::vector<std::string> trainable);

// Square patch -> 3 x 224 x 224, optionally flipped (bit 0 horizontal, bit 1
// vertical) before resizing.
ChannelImage PrepareInput(const GrayImage& patch, int variant, int side);

// Memo of backbone tokens keyed by (backbone digest, image, flip variant).
// Safe to share between threads.
class TokenCache {
 public:
  std::shared_ptr<const std::vector<double>> Find(const std::string& key) const;
  void Insert(const std::string& key, std::shared_ptr<const std::vector<double>> tokens);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<const std::vector<double>>> entries_;
};

// A labeled image set prepared for classification.
struct ClassifierDataset {
  std::vector<ingest::MassPatch> patches;
  std::vector<std::string> keys;  // content hash per patch

  static ClassifierDataset From(std::vector<ingest::MassPatch> patches);
  std::size_t size() const { return patches.size(); }
  std::vector<int> Labels() const;
  std::size_t SyntheticCount() const;
  ClassifierDataset Concat(const ClassifierDataset& other) const;
};

// Backbone tokens for the given samples and flip variants, from the cache
// when possible. Returns [rows.size() * out_tokens, out_dim] without graph.
// backbone_digest must be model.BackboneDigest(); callers hoist it.
nn::Tensor CachedTokens(const ClassifierModel& model, const std::string& backbone_digest,
                        const ClassifierDataset& data, std::span<const std::size_t> rows,
                        std::span<const int> variants, TokenCache* cache);

// Logits for the given samples: cached-token path when the backbone is
// frozen, otherwise a full differentiable forward.
nn::Tensor BatchLogits(const ClassifierModel& model, const ClassifierDataset& data, std::span<const std::size_t> rows,
                       std::span<const int> variants, TokenCache* cache, const std::string* backbone_digest = nullptr);

// Softmax P(malignant) per sample, unflipped, in order.
std::vector<double> Predict(const ClassifierModel& model, const ClassifierDataset& data, TokenCache* cache = nullptr);
double MalignantProbability(double logit_benign, double logit_malignant);

}  // namespace mammodp::classify

#endif  // MAMMODP_CLASSIFY_MODEL_HPP_
