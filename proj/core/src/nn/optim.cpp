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

#include "mammodp/nn/optim.hpp"

#include <cmath>

#include "mammodp/common/errors.hpp"

namespace mammodp::nn {

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    m_.emplace_back(p.values().size(), 0.0);
    v_.emplace_back(p.values().size(), 0.0);
  }
}

void Adam::Step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) continue;
    auto values = p.values();
    const auto grad = std::as_const(p).grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      double g = grad[j];
      if (config_.weight_decay != 0.0 && !config_.decoupled_weight_decay) g += config_.weight_decay * values[j];
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
      const double update = (m[j] / bc1) / (std::sqrt(v[j] / bc2) + config_.eps);
      if (config_.decoupled_weight_decay) values[j] -= config_.lr * config_.weight_decay * values[j];
      values[j] -= config_.lr * update;
    }
  }
}

void Adam::ZeroGrad() {
  for (auto& p : params_) p.ZeroGrad();
}

void Adam::Store(BlobContainer& out, const std::string& prefix) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto n = static_cast<std::int64_t>(m_[i].size());
    out.blobs[prefix + "m." + std::to_string(i)] = Blob{{n}, m_[i]};
    out.blobs[prefix + "v." + std::to_string(i)] = Blob{{n}, v_[i]};
  }
  out.blobs[prefix + "step"] = Blob{{1}, {static_cast<double>(step_)}};
}

void Adam::Load(const BlobContainer& in, const std::string& prefix) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto m = in.blobs.find(prefix + "m." + std::to_string(i));
    auto v = in.blobs.find(prefix + "v." + std::to_string(i));
    if (m == in.blobs.end() || v == in.blobs.end() || m->second.values.size() != m_[i].size() ||
        v->second.values.size() != v_[i].size()) {
      throw IoError("optimizer state incompatible at slot " + std::to_string(i));
    }
    m_[i] = m->second.values;
    v_[i] = v->second.values;
  }
  auto s = in.blobs.find(prefix + "step");
  if (s == in.blobs.end()) throw IoError("optimizer state missing step counter");
  step_ = static_cast<long>(s->second.values.at(0));
}

}  // namespace mammodp::nn
