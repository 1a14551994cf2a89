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

#ifndef MAMMODP_PRIVACY_DP_SGD_HPP_
#define MAMMODP_PRIVACY_DP_SGD_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mammodp/common/rng.hpp"
#include "mammodp/privacy/accountant.hpp"

namespace mammodp::privacy {

struct DpSgdConfig {
  double clip_norm = 1.0;         // C
  double noise_multiplier = 1.0;  // sigma
  double sampling_rate = 0.01;    // q, Poisson
  std::int64_t steps = 0;         // T

  void Validate() const;
};

class NonFiniteGradientError : public Error {
 public:
  using Error::Error;
};

double L2Norm(std::span<const double> v);

// g * min(1, C / ||g||) per sample; zero vectors pass through.
std::vector<std::vector<double>> ClipPerSample(std::span<const std::vector<double>> grads, double clip_norm);

// (sum_i g_i + xi) / expected_batch with xi ~ N(0, sigma^2 C^2 I).
// `dim` fixes the output size so an empty Poisson batch still yields noise.
std::vector<double> NoisyAggregate(std::span<const std::vector<double>> clipped, std::size_t dim, double sigma,
                                   double clip_norm, double expected_batch, Rng& rng);

// Each index in [0, n) is kept independently with probability q.
std::vector<std::size_t> PoissonSample(std::size_t n, double q, Rng& rng);

// What DP-SGD needs from a model: gradients over its trainable parameters
// only, one sample at a time, and a way to apply an aggregated update.
class PerSampleGradientSource {
 public:
  virtual ~PerSampleGradientSource() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> PerSampleGradient(std::size_t index) = 0;
  virtual void ApplyUpdate(std::span<const double> gradient) = 0;
};

struct DpStepResult {
  std::size_t realized_batch = 0;
  std::vector<double> noisy_gradient;
};

// One private step over an already drawn Poisson batch: per-sample
// gradients, clipping, noisy aggregation, update, then exactly one step of
// accounting. A non-finite gradient aborts before anything is applied.
DpStepResult DpSgdStep(PerSampleGradientSource& model, std::span<const std::size_t> batch,
                       const DpSgdConfig& config, double expected_batch, AccountantLedger& ledger, Rng& rng);

}  // namespace mammodp::privacy

#endif  // MAMMODP_PRIVACY_DP_SGD_HPP_
