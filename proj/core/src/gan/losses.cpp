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

#include "mammodp/gan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "mammodp/common/errors.hpp"

namespace mammodp::gan {
namespace {

double ClampProbability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

void CheckProbability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("probability outside [0, 1]");
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool Clamped(double p) { return p < kProbabilityClamp || p > 1.0 - kProbabilityClamp; }

}  // namespace

double SmoothRealLabel(Rng& rng, const SmoothingRange& range) {
  if (!(range.low < range.high)) throw ContractViolation("smoothing range must satisfy low < high");
  return std::uniform_real_distribution<double>(range.low, range.high)(rng);
}

double DiscriminatorLoss(double d_real, double d_fake, double real_target) {
  CheckProbability(d_real);
  CheckProbability(d_fake);
  return -(real_target * std::log(ClampProbability(d_real)) + std::log(1.0 - ClampProbability(d_fake)));
}

double GeneratorLoss(double d_fake) {
  CheckProbability(d_fake);
  return -std::log(ClampProbability(d_fake));
}

nn::Tensor DiscriminatorLossFromLogits(const nn::Tensor& real_logits, const nn::Tensor& fake_logits,
                                       std::span<const double> real_targets) {
  const auto nr = real_logits.numel(), nf = fake_logits.numel();
  if (nr == 0 || nf == 0) throw ContractViolation("discriminator loss needs nonempty batches");
  if (static_cast<std::int64_t>(real_targets.size()) != nr) throw ContractViolation("one target per real sample");
  double loss = 0.0;
  std::vector<double> g_real(nr), g_fake(nf);
  for (std::int64_t i = 0; i < nr; ++i) {
    const double p = StableSigmoid(real_logits.data()[i]);
    loss -= real_targets[i] * std::log(ClampProbability(p)) / static_cast<double>(nr);
    // d/dl of -t log sigmoid(l) = -t (1 - p)
    g_real[i] = Clamped(p) ? 0.0 : -real_targets[i] * (1.0 - p) / static_cast<double>(nr);
  }
  for (std::int64_t i = 0; i < nf; ++i) {
    const double p = StableSigmoid(fake_logits.data()[i]);
    loss -= std::log(1.0 - ClampProbability(p)) / static_cast<double>(nf);
    g_fake[i] = Clamped(p) ? 0.0 : p / static_cast<double>(nf);
  }
  auto rn = real_logits.ptr(), fn = fake_logits.ptr();
  return nn::MakeResult({1}, {loss}, {real_logits, fake_logits},
                        [rn, fn, g_real = std::move(g_real), g_fake = std::move(g_fake)](nn::Node& self) {
                          const double up = self.grad[0];
                          if (rn->requires_grad) {
                            auto& g = rn->EnsureGrad();
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += up * g_real[i];
                          }
                          if (fn->requires_grad) {
                            auto& g = fn->EnsureGrad();
                            for (std::size_t i = 0; i < g.size(); ++i) g[i] += up * g_fake[i];
                          }
                        });
}

nn::Tensor GeneratorLossFromLogits(const nn::Tensor& fake_logits) {
  const auto n = fake_logits.numel();
  if (n == 0) throw ContractViolation("generator loss needs a nonempty batch");
  double loss = 0.0;
  std::vector<double> grad(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const double p = StableSigmoid(fake_logits.data()[i]);
    loss -= std::log(ClampProbability(p)) / static_cast<double>(n);
    grad[i] = Clamped(p) ? 0.0 : -(1.0 - p) / static_cast<double>(n);
  }
  auto fn = fake_logits.ptr();
  return nn::MakeResult({1}, {loss}, {fake_logits}, [fn, grad = std::move(grad)](nn::Node& self) {
    auto& g = fn->EnsureGrad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * grad[i];
  });
}

}  // namespace mammodp::gan
