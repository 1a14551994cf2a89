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

#include "mammodp/classify/backbone.hpp"

#include "mammodp/common/errors.hpp"
#include "mammodp/nn/ops.hpp"

namespace mammodp::classify {
namespace {

constexpr double kInitStd = 0.02;
const std::vector<double> kNoMask;

// Window-order row r -> source row, for a batch of images laid out (n, y, x).
// Applies the cyclic shift by -shift before partitioning.
std::vector<std::int64_t> WindowPermutation(std::int64_t batch, int res, int window, int shift) {
  const int per_side = res / window;
  std::vector<std::int64_t> perm;
  perm.reserve(static_cast<std::size_t>(batch) * res * res);
  for (std::int64_t n = 0; n < batch; ++n) {
    for (int wy = 0; wy < per_side; ++wy) {
      for (int wx = 0; wx < per_side; ++wx) {
        for (int ty = 0; ty < window; ++ty) {
          for (int tx = 0; tx < window; ++tx) {
            const int y = (wy * window + ty + shift) % res;
            const int x = (wx * window + tx + shift) % res;
            perm.push_back(n * res * res + static_cast<std::int64_t>(y) * res + x);
          }
        }
      }
    }
  }
  return perm;
}

std::vector<std::int64_t> Inverse(const std::vector<std::int64_t>& perm) {
  std::vector<std::int64_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<std::int64_t>(i);
  return inv;
}

// Tokens from different pre-shift regions may not attend to each other.
std::vector<double> ShiftMask(int res, int window, int shift) {
  std::vector<int> region(static_cast<std::size_t>(res) * res);
  auto band = [&](int v) { return v < res - window ? 0 : (v < res - shift ? 1 : 2); };
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) region[static_cast<std::size_t>(y) * res + x] = band(y) * 3 + band(x);
  }
  const int per_side = res / window, t = window * window;
  std::vector<double> mask(static_cast<std::size_t>(per_side) * per_side * t * t);
  for (int wy = 0; wy < per_side; ++wy) {
    for (int wx = 0; wx < per_side; ++wx) {
      double* m = mask.data() + static_cast<std::size_t>(wy * per_side + wx) * t * t;
      for (int i = 0; i < t; ++i) {
        const int ri = region[static_cast<std::size_t>(wy * window + i / window) * res + wx * window + i % window];
        for (int j = 0; j < t; ++j) {
          const int rj = region[static_cast<std::size_t>(wy * window + j / window) * res + wx * window + j % window];
          m[i * t + j] = ri == rj ? 0.0 : -100.0;
        }
      }
    }
  }
  return mask;
}

std::vector<std::int32_t> RelativeIndex(int window) {
  const int t = window * window;
  std::vector<std::int32_t> idx(static_cast<std::size_t>(t) * t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      const int dy = i / window - j / window + window - 1;
      const int dx = i % window - j % window + window - 1;
      idx[static_cast<std::size_t>(i) * t + j] = dy * (2 * window - 1) + dx;
    }
  }
  return idx;
}

}  // namespace

void BackboneConfig::Validate() const {
  std::vector<std::string> issues;
  if (patch < 1 || image_side % patch != 0) issues.push_back("backbone patch must divide image_side");
  if (depths.empty() || depths.size() != heads.size()) issues.push_back("backbone depths and heads differ in length");
  if (embed_dim < 1 || mlp_ratio < 1) issues.push_back("backbone widths must be positive");
  if (window < 1) issues.push_back("backbone window must be positive");
  if (issues.empty()) {
    int res = image_side / patch, dim = embed_dim;
    for (std::size_t s = 0; s < depths.size(); ++s) {
      if (res % window != 0) issues.push_back("stage " + std::to_string(s) + " resolution not divisible by window");
      if (heads[s] < 1 || dim % heads[s] != 0) issues.push_back("stage " + std::to_string(s) + " heads must divide width");
      if (depths[s] < 1) issues.push_back("stage depths must be positive");
      if (s + 1 < depths.size()) {
        if (res % 2 != 0) issues.push_back("patch merging needs an even resolution");
        res /= 2;
        dim *= 2;
      }
    }
  }
  if (!issues.empty()) throw ConfigError(issues);
}

int BackboneConfig::out_dim() const { return embed_dim << (depths.size() - 1); }

int BackboneConfig::out_tokens() const {
  const int res = (image_side / patch) >> (depths.size() - 1);
  return res * res;
}

nlohmann::json BackboneConfig::ToJson() const {
  return {{"image_side", image_side}, {"patch", patch}, {"window", window}, {"embed_dim", embed_dim},
          {"depths", depths},         {"heads", heads}, {"mlp_ratio", mlp_ratio}, {"seed", seed}};
}

BackboneConfig BackboneConfig::FromJson(const nlohmann::json& j) {
  BackboneConfig c;
  c.image_side = j.at("image_side");
  c.patch = j.at("patch");
  c.window = j.at("window");
  c.embed_dim = j.at("embed_dim");
  c.depths = j.at("depths").get<std::vector<int>>();
  c.heads = j.at("heads").get<std::vector<int>>();
  c.mlp_ratio = j.at("mlp_ratio");
  c.seed = j.at("seed");
  return c;
}

void SwinBlock::Collect(const std::string& prefix, nn::StateList& out) const {
  norm1.Collect(prefix + ".norm1", out);
  qkv.Collect(prefix + ".qkv", out);
  out.push_back({prefix + ".bias_table", bias_table});
  proj.Collect(prefix + ".proj", out);
  norm2.Collect(prefix + ".norm2", out);
  fc1.Collect(prefix + ".fc1", out);
  fc2.Collect(prefix + ".fc2", out);
}

void PatchMerging::Collect(const std::string& prefix, nn::StateList& out) const {
  norm.Collect(prefix + ".norm", out);
  out.push_back({prefix + ".reduction.weight", reduction.weight});
}

WindowBackbone::WindowBackbone(const BackboneConfig& config) : config_(config) {
  config.Validate();
  Rng rng = MakeRng(config.seed, {0xBAC4B0E5ULL});
  const int in_dim = 3 * config.patch * config.patch;
  patch_embed_ = nn::LinearLayer(in_dim, config.embed_dim, rng, kInitStd);
  embed_norm_ = nn::LayerNormLayer(config.embed_dim);
  bias_index_ = RelativeIndex(config.window);
  int res = config.image_side / config.patch, dim = config.embed_dim;
  const int table_rows = (2 * config.window - 1) * (2 * config.window - 1);
  for (std::size_t s = 0; s < config.depths.size(); ++s) {
    std::vector<SwinBlock> blocks;
    const int shift = res > config.window ? config.window / 2 : 0;
    for (int d = 0; d < config.depths[s]; ++d) {
      SwinBlock b;
      b.stage = static_cast<int>(s);
      b.dim = dim;
      b.heads = config.heads[s];
      b.resolution = res;
      b.shift = d % 2 == 1 ? shift : 0;
      b.norm1 = nn::LayerNormLayer(dim);
      b.qkv = nn::LinearLayer(dim, 3 * dim, rng, kInitStd);
      b.bias_table = nn::Tensor::Zeros({table_rows, b.heads}, true);
      nn::InitNormal(b.bias_table, rng, 0.0, kInitStd);
      b.proj = nn::LinearLayer(dim, dim, rng, kInitStd);
      b.norm2 = nn::LayerNormLayer(dim);
      b.fc1 = nn::LinearLayer(dim, config.mlp_ratio * dim, rng, kInitStd);
      b.fc2 = nn::LinearLayer(config.mlp_ratio * dim, dim, rng, kInitStd);
      blocks.push_back(std::move(b));
    }
    stages_.push_back(std::move(blocks));
    masks_.push_back(shift > 0 ? ShiftMask(res, config.window, shift) : std::vector<double>{});
    if (s + 1 < config.depths.size()) {
      PatchMerging m;
      m.norm = nn::LayerNormLayer(4 * dim);
      m.reduction = nn::LinearLayer(4 * dim, 2 * dim, rng, kInitStd);
      m.reduction.bias = nn::Tensor();
      merges_.push_back(std::move(m));
      res /= 2;
      dim *= 2;
    }
  }
}

nn::Tensor WindowBackbone::Block(const SwinBlock& b, const nn::Tensor& x, std::int64_t batch) const {
  const int w = config_.window, t = w * w;
  const auto perm = WindowPermutation(batch, b.resolution, w, b.shift);
  const int per_side = b.resolution / w;
  nn::Tensor h = nn::GatherRows(b.norm1(x), perm);
  h = nn::WindowAttention(b.qkv(h), b.heads, t, b.bias_table, bias_index_,
                          b.shift > 0 ? masks_[b.stage] : kNoMask,
                          per_side * per_side);
  h = nn::GatherRows(b.proj(h), Inverse(perm));
  nn::Tensor y = nn::Add(x, h);
  return nn::Add(y, b.fc2(nn::Gelu(b.fc1(b.norm2(y)))));
}

nn::Tensor WindowBackbone::Forward(const std::vector<ChannelImage>& images) const {
  if (images.empty()) throw EmptyInputError("backbone forward on an empty batch");
  const int side = config_.image_side, p = config_.patch, res = side / p;
  const auto batch = static_cast<std::int64_t>(images.size());
  const int in_dim = 3 * p * p;
  std::vector<double> rows(static_cast<std::size_t>(batch) * res * res * in_dim);
  std::size_t o = 0;
  for (const auto& img : images) {
    if (img.channels != 3 || img.height != side || img.width != side) {
      throw ContractViolation("backbone expects 3 x " + std::to_string(side) + " x " + std::to_string(side));
    }
    for (int py = 0; py < res; ++py) {
      for (int px = 0; px < res; ++px) {
        for (int c = 0; c < 3; ++c) {
          for (int ky = 0; ky < p; ++ky) {
            for (int kx = 0; kx < p; ++kx) rows[o++] = img.at(c, px * p + kx, py * p + ky);
          }
        }
      }
    }
  }
  nn::Tensor x = nn::Tensor::FromData({batch * res * res, in_dim}, std::move(rows));
  x = embed_norm_(patch_embed_(x));
  int r = res;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (const auto& block : stages_[s]) x = Block(block, x, batch);
    if (s < merges_.size()) {
      const int half = r / 2;
      std::vector<std::int64_t> idx[4];
      for (std::int64_t n = 0; n < batch; ++n) {
        for (int y = 0; y < half; ++y) {
          for (int xx = 0; xx < half; ++xx) {
            const std::int64_t base = n * r * r;
            idx[0].push_back(base + (2 * y) * r + 2 * xx);
            idx[1].push_back(base + (2 * y + 1) * r + 2 * xx);
            idx[2].push_back(base + (2 * y) * r + 2 * xx + 1);
            idx[3].push_back(base + (2 * y + 1) * r + 2 * xx + 1);
          }
        }
      }
      nn::Tensor cat = nn::ConcatCols(nn::ConcatCols(nn::GatherRows(x, idx[0]), nn::GatherRows(x, idx[1])),
                                      nn::ConcatCols(nn::GatherRows(x, idx[2]), nn::GatherRows(x, idx[3])));
      x = merges_[s].reduction(merges_[s].norm(cat));
      r = half;
    }
  }
  return x;
}

void WindowBackbone::Collect(const std::string& prefix, nn::StateList& out) const {
  patch_embed_.Collect(prefix + "patch_embed", out);
  embed_norm_.Collect(prefix + "embed_norm", out);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t d = 0; d < stages_[s].size(); ++d) {
      stages_[s][d].Collect(prefix + "stage" + std::to_string(s) + ".block" + std::to_string(d), out);
    }
    if (s < merges_.size()) merges_[s].Collect(prefix + "stage" + std::to_string(s) + ".merge", out);
  }
}

}  // namespace mammodp::classify
