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

#ifndef MAMMODP_GAN_LOSSES_HPP_
#define MAMMODP_GAN_LOSSES_HPP_

#include <span>

#include "mammodp/common/rng.hpp"
#include "mammodp/nn/tensor.hpp"

namespace mammodp::gan {

inline constexpr double kProbabilityClamp = 1e-7;

struct SmoothingRange {
  double low = 0.7;
  double high = 1.2;
};

// One-sided smoothing: uniform target for real samples only.
double SmoothRealLabel(Rng& rng, const SmoothingRange& range = {});

// Target used for generated samples in the discriminator step. Always 0.
inline constexpr double kFakeTarget = 0.0;

// -[t log d_real + log(1 - d_fake)], probabilities clamped to
// [1e-7, 1 - 1e-7]. Inputs outside [0, 1] are rejected.
double DiscriminatorLoss(double d_real, double d_fake, double real_target);

// Non-saturating -log d_fake, with the same clamping.
double GeneratorLoss(double d_fake);

// Batched forms on discriminator logits ([N, 1]); each is a batch mean and
// fully differentiable. The gradient is zero where the clamp is active.
nn::Tensor DiscriminatorLossFromLogits(const nn::Tensor& real_logits, const nn::Tensor& fake_logits,
                                       std::span<const double> real_targets);
nn::Tensor GeneratorLossFromLogits(const nn::Tensor& fake_logits);

}  // namespace mammodp::gan

#endif  // MAMMODP_GAN_LOSSES_HPP_
