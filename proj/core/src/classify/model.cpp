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

#include "mammodp/classify/model.hpp"

#include <cmath>

#include "mammodp/common/hash.hpp"
#include "mammodp/common/resample.hpp"
#include "mammodp/ingest/geometry.hpp"
#include "mammodp/nn/ops.hpp"

namespace mammodp::classify {
namespace {

bool Matches(const std::string& name, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes) {
    if (name.compare(0, p.size(), p) == 0) return true;
  }
  return false;
}

constexpr std::size_t kPredictChunk = 16;

}  // namespace

std::string ToString(TrainablePolicy p) {
  switch (p) {
    case TrainablePolicy::kHeadOnly: return "head-only";
    case TrainablePolicy::kLastTwoLayers: return "last-two-layers";
    case TrainablePolicy::kAllParams: return "all-params";
  }
  return "?";
}

std::vector<std::string> PolicyPrefixes(TrainablePolicy policy, const std::vector<std::string>& last_layers) {
  switch (policy) {
    case TrainablePolicy::kHeadOnly: return {"head."};
    case TrainablePolicy::kLastTwoLayers: return last_layers;
    case TrainablePolicy::kAllParams: return {""};
  }
  return {};
}

nn::Tensor ClassifierModel::LogitsFromTokens(const nn::Tensor& tokens, std::int64_t batch) const {
  return head_(nn::GroupMeanRows(norm_(tokens), batch));
}

nn::Tensor ClassifierModel::Logits(const std::vector<ChannelImage>& images) const {
  return LogitsFromTokens(backbone_.Forward(images), static_cast<std::int64_t>(images.size()));
}

nn::StateList ClassifierModel::State() const {
  nn::StateList s;
  backbone_.Collect("backbone.", s);
  norm_.Collect("norm", s);
  head_.Collect("head", s);
  return s;
}

nn::StateList ClassifierModel::TrainableState() const {
  nn::StateList out;
  for (auto& e : State()) {
    if (!e.buffer && Matches(e.name, trainable_prefixes_)) out.push_back(e);
  }
  return out;
}

std::size_t ClassifierModel::TrainableCount() const {
  std::size_t n = 0;
  for (const auto& e : TrainableState()) n += static_cast<std::size_t>(e.tensor.numel());
  return n;
}

std::size_t ClassifierModel::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& e : State()) n += static_cast<std::size_t>(e.tensor.numel());
  return n;
}

std::string ClassifierModel::Digest() const { return nn::StateDigest(State()); }

std::string ClassifierModel::BackboneDigest() const {
  nn::StateList s;
  backbone_.Collect("backbone.", s);
  return nn::StateDigest(s);
}

bool ClassifierModel::FrozenBackbone() const {
  for (const auto& e : TrainableState()) {
    if (e.name.rfind("backbone.", 0) == 0) return false;
  }
  return true;
}

ClassifierModel BuildClassifier(const BackboneConfig& config, const BlobContainer* weights, std::uint64_t head_seed,
                                std::vector<std::string> trainable) {
  ClassifierModel m;
  m.backbone_ = WindowBackbone(config);
  m.norm_ = nn::LayerNormLayer(config.out_dim());
  if (weights) {
    nn::StateList s;
    m.backbone_.Collect("backbone.", s);
    m.norm_.Collect("norm", s);
    nn::LoadState(*weights, s);
  }
  Rng rng = MakeRng(head_seed, {0x4EADULL});
  m.head_ = nn::LinearLayer(config.out_dim(), kNumClasses, rng, 0.02);
  m.SetTrainable(std::move(trainable));
  return m;
}

void ClassifierModel::SetTrainable(std::vector<std::string> prefixes) {
  trainable_prefixes_ = std::move(prefixes);
  auto selected = TrainableState();
  for (auto& e : State()) e.tensor.set_requires_grad(false);
  for (auto& e : selected) e.tensor.set_requires_grad(true);
}

ChannelImage PrepareInput(const GrayImage& patch, int variant, int side) {
  GrayImage img = patch;
  if (variant & 1) img = FlipHorizontal(img);
  if (variant & 2) img = FlipVertical(img);
  if (side == ingest::kClassifierSide) return ingest::ResizeForClassifier(img);
  if (!img.square()) throw ContractViolation("classifier input must be square");
  const GrayImage resized = Resample(img, side, side);
  ChannelImage out{3, side, side, {}};
  for (int c = 0; c < 3; ++c) out.data.insert(out.data.end(), resized.pixels.begin(), resized.pixels.end());
  return out;
}

std::shared_ptr<const std::vector<double>> TokenCache::Find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

void TokenCache::Insert(const std::string& key, std::shared_ptr<const std::vector<double>> tokens) {
  std::lock_guard lock(mu_);
  entries_.emplace(key, std::move(tokens));
}

std::size_t TokenCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

ClassifierDataset ClassifierDataset::From(std::vector<ingest::MassPatch> patches) {
  ClassifierDataset d;
  d.keys.reserve(patches.size());
  for (const auto& p : patches) {
    if (!p.pixels.square()) throw ContractViolation("classifier patches must be square");
    d.keys.push_back(Sha256Hex(std::span<const double>(p.pixels.pixels)) + "/" + std::to_string(p.pixels.width));
  }
  d.patches = std::move(patches);
  return d;
}

std::vector<int> ClassifierDataset::Labels() const {
  std::vector<int> l;
  for (const auto& p : patches) l.push_back(ingest::LabelIndex(p.label));
  return l;
}

std::size_t ClassifierDataset::SyntheticCount() const {
  std::size_t n = 0;
  for (const auto& p : patches) n += p.synthetic;
  return n;
}

ClassifierDataset ClassifierDataset::Concat(const ClassifierDataset& other) const {
  ClassifierDataset d = *this;
  d.patches.insert(d.patches.end(), other.patches.begin(), other.patches.end());
  d.keys.insert(d.keys.end(), other.keys.begin(), other.keys.end());
  return d;
}

nn::Tensor CachedTokens(const ClassifierModel& model, const std::string& digest, const ClassifierDataset& data,
                        std::span<const std::size_t> rows, std::span<const int> variants, TokenCache* cache) {
  if (rows.size() != variants.size()) throw ContractViolation("one flip variant per row is required");
  const auto& cfg = model.backbone_config();
  const std::size_t width = static_cast<std::size_t>(cfg.out_tokens()) * cfg.out_dim();
  std::vector<std::shared_ptr<const std::vector<double>>> found(rows.size());
  std::vector<std::size_t> missing;
  std::vector<std::string> keys(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    keys[i] = digest + ":" + data.keys.at(rows[i]) + ":" + std::to_string(variants[i]);
    if (cache) found[i] = cache->Find(keys[i]);
    if (!found[i]) missing.push_back(i);
  }
  nn::NoGradGuard no_grad;
  for (std::size_t start = 0; start < missing.size(); start += kPredictChunk) {
    const std::size_t end = std::min(missing.size(), start + kPredictChunk);
    std::vector<ChannelImage> inputs;
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = missing[k];
      inputs.push_back(PrepareInput(data.patches[rows[i]].pixels, variants[i], cfg.image_side));
    }
    const nn::Tensor tokens = model.backbone().Forward(inputs);
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = missing[k];
      const double* src = tokens.data() + (k - start) * width;
      auto v = std::make_shared<const std::vector<double>>(src, src + width);
      if (cache) cache->Insert(keys[i], v);
      found[i] = std::move(v);
    }
  }
  std::vector<double> out;
  out.reserve(rows.size() * width);
  for (const auto& f : found) out.insert(out.end(), f->begin(), f->end());
  return nn::Tensor::FromData(
      {static_cast<std::int64_t>(rows.size()) * cfg.out_tokens(), cfg.out_dim()}, std::move(out));
}

nn::Tensor BatchLogits(const ClassifierModel& model, const ClassifierDataset& data, std::span<const std::size_t> rows,
                       std::span<const int> variants, TokenCache* cache, const std::string* backbone_digest) {
  const auto batch = static_cast<std::int64_t>(rows.size());
  if (model.FrozenBackbone()) {
    const std::string digest = backbone_digest ? *backbone_digest : model.BackboneDigest();
    return model.LogitsFromTokens(CachedTokens(model, digest, data, rows, variants, cache), batch);
  }
  std::vector<ChannelImage> inputs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inputs.push_back(PrepareInput(data.patches[rows[i]].pixels, variants[i], model.backbone_config().image_side));
  }
  return model.Logits(inputs);
}

double MalignantProbability(double logit_benign, double logit_malignant) {
  const double d = logit_benign - logit_malignant;
  if (d >= 0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

std::vector<double> Predict(const ClassifierModel& model, const ClassifierDataset& data, TokenCache* cache) {
  nn::NoGradGuard no_grad;
  const std::string digest = model.FrozenBackbone() ? model.BackboneDigest() : std::string();
  std::vector<double> probs;
  probs.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += kPredictChunk) {
    const std::size_t end = std::min(data.size(), start + kPredictChunk);
    std::vector<std::size_t> rows;
    for (std::size_t i = start; i < end; ++i) rows.push_back(i);
    const std::vector<int> variants(rows.size(), 0);
    const nn::Tensor logits = BatchLogits(model, data, rows, variants, cache, &digest);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      probs.push_back(MalignantProbability(logits.data()[2 * i], logits.data()[2 * i + 1]));
    }
  }
  return probs;
}

}  // namespace mammodp::classify
