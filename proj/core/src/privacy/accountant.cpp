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

#include "mammodp/privacy/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mammodp::privacy {
namespace {

constexpr double kSigmaLow = 1e-2;
constexpr double kSigmaHigh = 1e4;
constexpr double kCalibrationBand = 0.98;

void CheckMechanism(double q, double sigma) {
  if (!(q > 0.0 && q <= 1.0)) throw ContractViolation("sampling rate must lie in (0, 1], got " + std::to_string(q));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ContractViolation("noise multiplier must be positive, got " + std::to_string(sigma));
  }
}

double IntegerOrderRdp(double q, double sigma, int alpha) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_2s2 = 1.0 / (2.0 * sigma * sigma);
  const double lg_alpha = std::lgamma(alpha + 1.0);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(static_cast<std::size_t>(alpha) + 1);
  for (int k = 0; k <= alpha; ++k) {
    const double kd = k;
    const double log_binom = lg_alpha - std::lgamma(kd + 1.0) - std::lgamma(alpha - kd + 1.0);
    const double t = log_binom + (alpha - kd) * log_1mq + kd * log_q + (kd * kd - kd) * inv_2s2;
    terms[k] = t;
    max_term = std::max(max_term, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  const double log_a = max_term + std::log(acc);
  return std::max(0.0, log_a / (alpha - 1.0));
}

}  // namespace

std::vector<double> DefaultOrders() {
  std::vector<double> orders{1.25, 1.5, 1.75};
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  orders.push_back(128);
  orders.push_back(256);
  return orders;
}

double SubsampledGaussianRdp(double q, double sigma, double order) {
  CheckMechanism(q, sigma);
  if (!(order > 1.0)) throw ContractViolation("Renyi order must exceed 1");
  if (q == 1.0) return order / (2.0 * sigma * sigma);
  return IntegerOrderRdp(q, sigma, static_cast<int>(std::ceil(order)));
}

AccountantLedger::AccountantLedger(std::vector<double> orders) : orders_(std::move(orders)), rdp_(orders_.size(), 0.0) {
  if (orders_.empty()) throw ContractViolation("accountant needs at least one order");
  for (double a : orders_) {
    if (!(a > 1.0)) throw ContractViolation("Renyi orders must exceed 1");
  }
}

const std::vector<double>& AccountantLedger::PerStep(double q, double sigma) {
  auto key = std::make_pair(q, sigma);
  auto it = per_step_cache_.find(key);
  if (it != per_step_cache_.end()) return it->second;
  std::vector<double> values;
  values.reserve(orders_.size());
  for (double a : orders_) values.push_back(SubsampledGaussianRdp(q, sigma, a));
  return per_step_cache_.emplace(key, std::move(values)).first->second;
}

void AccountantLedger::Accumulate(double q, double sigma, std::int64_t steps) {
  CheckMechanism(q, sigma);
  if (steps < 0) throw ContractViolation("step count must be nonnegative");
  if (steps == 0) return;
  const double t = static_cast<double>(steps);
  if (q == 1.0) {
    // Closed form evaluated directly so q = 1 ledgers equal T * a / (2 sigma^2).
    for (std::size_t i = 0; i < orders_.size(); ++i) rdp_[i] += t * orders_[i] / (2.0 * sigma * sigma);
  } else {
    const auto& per_step = PerStep(q, sigma);
    for (std::size_t i = 0; i < orders_.size(); ++i) rdp_[i] += t * per_step[i];
  }
  events_.push_back({q, sigma, steps});
}

std::int64_t AccountantLedger::total_steps() const noexcept {
  std::int64_t total = 0;
  for (const auto& e : events_) total += e.steps;
  return total;
}

nlohmann::json AccountantLedger::ToJson() const {
  nlohmann::json j;
  j["orders"] = orders_;
  j["rdp"] = rdp_;
  j["events"] = nlohmann::json::array();
  for (const auto& e : events_) {
    j["events"].push_back({{"q", e.sampling_rate}, {"sigma", e.noise_multiplier}, {"steps", e.steps}});
  }
  return j;
}

AccountantLedger AccountantLedger::FromJson(const nlohmann::json& j) {
  AccountantLedger ledger(j.at("orders").get<std::vector<double>>());
  ledger.rdp_ = j.at("rdp").get<std::vector<double>>();
  if (ledger.rdp_.size() != ledger.orders_.size()) throw IoError("ledger rdp/order length mismatch");
  for (const auto& e : j.at("events")) {
    ledger.events_.push_back({e.at("q").get<double>(), e.at("sigma").get<double>(), e.at("steps").get<std::int64_t>()});
  }
  return ledger;
}

EpsilonAtOrder EpsilonAtDelta(const AccountantLedger& ledger, double delta) {
  if (ledger.empty()) throw EmptyInputError("epsilon requested from an empty accountant ledger");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("delta must lie in (0, 1)");
  const double log_inv_delta = -std::log(delta);
  EpsilonAtOrder best{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < ledger.orders().size(); ++i) {
    const double a = ledger.orders()[i];
    const double eps = ledger.rdp()[i] + log_inv_delta / (a - 1.0);
    if (eps < best.epsilon) best = {eps, a};
  }
  return best;
}

double CalibrateSigma(const PrivacyBudget& target, double q, std::int64_t steps, const std::vector<double>& orders) {
  target.Validate();
  if (!(q > 0.0 && q <= 1.0)) throw ContractViolation("sampling rate must lie in (0, 1]");
  if (steps <= 0) throw ContractViolation("calibration needs at least one step");

  auto spent = [&](double sigma) {
    AccountantLedger ledger(orders);
    ledger.Accumulate(q, sigma, steps);
    return EpsilonAtDelta(ledger, target.delta).epsilon;
  };
  auto in_band = [&](double eps) { return eps <= target.epsilon && eps >= kCalibrationBand * target.epsilon; };

  double lo = kSigmaLow, hi = kSigmaHigh;
  const double eps_hi = spent(hi);
  if (eps_hi > target.epsilon) {
    throw InfeasibleBudgetError("no noise multiplier up to 1e4 reaches epsilon " + std::to_string(target.epsilon));
  }
  if (in_band(eps_hi)) return hi;
  const double eps_lo = spent(lo);
  if (in_band(eps_lo)) return lo;
  if (eps_lo <= target.epsilon) {
    throw InfeasibleBudgetError("epsilon " + std::to_string(target.epsilon) +
                                " is looser than the smallest noise multiplier 1e-2 can spend");
  }
  // Invariant: spent(lo) > target >= spent(hi).
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double eps = spent(mid);
    if (in_band(eps)) return mid;
    if (eps > target.epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw InfeasibleBudgetError("calibration did not converge for epsilon " + std::to_string(target.epsilon));
}

}  // namespace mammodp::privacy
