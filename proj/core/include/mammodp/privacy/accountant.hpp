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

#ifndef MAMMODP_PRIVACY_ACCOUNTANT_HPP_
#define MAMMODP_PRIVACY_ACCOUNTANT_HPP_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mammodp/privacy/budget.hpp"

namespace mammodp::privacy {

// {1.25, 1.5, 1.75, 2, 3, ..., 64, 128, 256}.
std::vector<double> DefaultOrders();

// Per-application RDP of the Poisson-subsampled Gaussian mechanism at one
// order. Integer orders use the binomial expansion
//   A = sum_k C(a,k) (1-q)^(a-k) q^k exp((k^2 - k) / (2 sigma^2)),
//   rdp = log(A) / (a - 1),
// evaluated with log-sum-exp. Fractional orders use the bound at ceil(a).
// With q == 1 this is the Gaussian mechanism, a / (2 sigma^2), exactly.
double SubsampledGaussianRdp(double q, double sigma, double order);

struct AccountantEvent {
  double sampling_rate = 0.0;
  double noise_multiplier = 0.0;
  std::int64_t steps = 0;
};

// Accumulated RDP over a fixed order grid. Single writer.
class AccountantLedger {
 public:
  explicit AccountantLedger(std::vector<double> orders = DefaultOrders());

  // Composes `steps` applications of the subsampled Gaussian mechanism.
  // steps == 0 leaves the ledger untouched.
  void Accumulate(double q, double sigma, std::int64_t steps);

  bool empty() const noexcept { return events_.empty(); }
  const std::vector<double>& orders() const noexcept { return orders_; }
  const std::vector<double>& rdp() const noexcept { return rdp_; }
  const std::vector<AccountantEvent>& events() const noexcept { return events_; }
  std::int64_t total_steps() const noexcept;

  nlohmann::json ToJson() const;
  static AccountantLedger FromJson(const nlohmann::json& j);

 private:
  const std::vector<double>& PerStep(double q, double sigma);

  std::vector<double> orders_;
  std::vector<double> rdp_;
  std::vector<AccountantEvent> events_;
  std::map<std::pair<double, double>, std::vector<double>> per_step_cache_;
};

struct EpsilonAtOrder {
  double epsilon = 0.0;
  double order = 0.0;
};

// eps = min over orders of rdp(a) + log(1/delta) / (a - 1).
EpsilonAtOrder EpsilonAtDelta(const AccountantLedger& ledger, double delta);

// Smallest-effort binary search (in log sigma over [1e-2, 1e4]) for a noise
// multiplier whose spent epsilon after `steps` lands in [0.98, 1] * target.
double CalibrateSigma(const PrivacyBudget& target, double q, std::int64_t steps,
                      const std::vector<double>& orders = DefaultOrders());

}  // namespace mammodp::privacy

#endif  // MAMMODP_PRIVACY_ACCOUNTANT_HPP_
