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

#include "mammodp/privacy/budget.hpp"

#include <cmath>
#include <string>

namespace mammodp::privacy {

PrivacyBudget PrivacyBudget::Make(double epsilon, double delta) {
  PrivacyBudget b{epsilon, delta};
  b.Validate();
  return b;
}

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ContractViolation("privacy budget epsilon must be positive and finite, got " + std::to_string(epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ContractViolation("privacy budget delta must lie in (0, 1), got " + std::to_string(delta));
  }
}

PrivacyBudget GroupPrivacy(const PrivacyBudget& budget, int k) {
  if (k < 1) throw ContractViolation("group size must be >= 1");
  const double kd = static_cast<double>(k);
  return PrivacyBudget{kd * budget.epsilon, kd * std::exp((kd - 1.0) * budget.epsilon) * budget.delta};
}

}  // namespace mammodp::privacy
