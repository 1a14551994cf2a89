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

#ifndef MAMMODP_PRIVACY_BUDGET_HPP_
#define MAMMODP_PRIVACY_BUDGET_HPP_

#include "mammodp/common/errors.hpp"

namespace mammodp::privacy {

// (epsilon, delta) guarantee. A run without a guarantee carries no budget
// at all (std::optional<PrivacyBudget> is empty), rendered as infinity.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  // Throws ContractViolation unless epsilon > 0 and 0 < delta < 1.
  static PrivacyBudget Make(double epsilon, double delta);
  void Validate() const;
};

class InfeasibleBudgetError : public Error {
 public:
  using Error::Error;
};

// Classical k-group bound: (k * eps, k * exp((k - 1) * eps) * delta).
// The returned delta may reach or exceed 1, i.e. the guarantee is vacuous;
// the result is therefore not re-validated.
PrivacyBudget GroupPrivacy(const PrivacyBudget& budget, int k);

}  // namespace mammodp::privacy

#endif  // MAMMODP_PRIVACY_BUDGET_HPP_
