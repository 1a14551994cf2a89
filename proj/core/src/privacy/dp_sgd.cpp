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

#include "mammodp/privacy/dp_sgd.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mammodp::privacy {

void DpSgdConfig::Validate() const {
  if (!(clip_norm > 0.0)) throw ContractViolation("clip norm must be positive");
  if (!(noise_multiplier > 0.0)) throw ContractViolation("noise multiplier must be positive");
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) throw ContractViolation("sampling rate must lie in (0, 1]");
  if (steps < 0) throw ContractViolation("step count must be nonnegative");
}

double L2Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<std::vector<double>> ClipPerSample(std::span<const std::vector<double>> grads, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ContractViolation("clip norm must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(grads.size());
  for (const auto& g : grads) {
    const double norm = L2Norm(g);
    auto& c = out.emplace_back(g);
    if (norm > clip_norm) {
      double factor = clip_norm / norm;
      for (double& v : c) v *= factor;
      // Rounding can leave the result a few ulps above the bound.
      while (L2Norm(c) > clip_norm) {
        factor = std::nextafter(factor, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = g[i] * factor;
      }
    }
  }
  return out;
}

std::vector<double> NoisyAggregate(std::span<const std::vector<double>> clipped, std::size_t dim, double sigma,
                                   double clip_norm, double expected_batch, Rng& rng) {
  if (!(expected_batch > 0.0)) throw ContractViolation("expected batch size must be positive");
  if (!(sigma >= 0.0) || !(clip_norm > 0.0)) throw ContractViolation("noise parameters must be positive");
  std::vector<double> sum(dim, 0.0);
  for (const auto& g : clipped) {
    if (g.size() != dim) throw ContractViolation("gradient dimension mismatch in aggregation");
    for (std::size_t i = 0; i < dim; ++i) sum[i] += g[i];
  }
  std::normal_distribution<double> noise(0.0, sigma * clip_norm);
  for (double& v : sum) v = (v + noise(rng)) / expected_batch;
  return sum;
}

std::vector<std::size_t> PoissonSample(std::size_t n, double q, Rng& rng) {
  if (!(q > 0.0 && q <= 1.0)) throw ContractViolation("sampling rate must lie in (0, 1]");
  std::vector<std::size_t> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Always draw so that the stream position does not depend on q == 1.
    const double draw = u(rng);
    if (draw < q) out.push_back(i);
  }
  return out;
}

DpStepResult DpSgdStep(PerSampleGradientSource& model, std::span<const std::size_t> batch,
                       const DpSgdConfig& config, double expected_batch, AccountantLedger& ledger, Rng& rng) {
  config.Validate();
  const std::size_t dim = model.dimension();
  std::vector<std::vector<double>> grads;
  grads.reserve(batch.size());
  for (std::size_t index : batch) {
    auto g = model.PerSampleGradient(index);
    if (g.size() != dim) throw ContractViolation("per-sample gradient has wrong dimension");
    for (double v : g) {
      if (!std::isfinite(v)) {
        throw NonFiniteGradientError("non-finite per-sample gradient for sample " + std::to_string(index));
      }
    }
    grads.push_back(std::move(g));
  }
  const auto clipped = ClipPerSample(grads, config.clip_norm);
  DpStepResult result;
  result.realized_batch = batch.size();
  result.noisy_gradient =
      NoisyAggregate(clipped, dim, config.noise_multiplier, config.clip_norm, expected_batch, rng);
  model.ApplyUpdate(result.noisy_gradient);
  ledger.Accumulate(config.sampling_rate, config.noise_multiplier, 1);
  return result;
}

}  // namespace mammodp::privacy
