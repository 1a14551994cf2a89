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

#ifndef MAMMODP_CLASSIFY_REGIME_HPP_
#define MAMMODP_CLASSIFY_REGIME_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mammodp/classify/model.hpp"
#include "mammodp/privacy/budget.hpp"

namespace mammodp::classify {

enum class RegimeKind { kReal, kSyn, kSynPre, kRealPlusSyn, kSynPreThenRealFT };

// CLI tokens: real, syn, synpre, real+syn, synpre+realft.
RegimeKind ParseRegime(std::string_view token);
std::string RegimeToken(RegimeKind kind);
// Table labels: Real, Syn, SynPre, Real+Syn, SynPre+RealFT.
std::string RegimeLabel(RegimeKind kind);
std::vector<RegimeKind> AllRegimes();

bool UsesRealData(RegimeKind kind);
bool UsesSyntheticData(RegimeKind kind);
// Regimes with a DP-trained stage. Syn and SynPre never see real images
// during training, so a finite budget does not apply to them.
bool PrivacyApplies(RegimeKind kind);

// The budget the run actually uses (empty for privacy-exempt regimes).
std::optional<privacy::PrivacyBudget> EffectiveBudget(RegimeKind kind,
                                                      const std::optional<privacy::PrivacyBudget>& requested);

// "6", "∞", and "∞|6" style. machine=true writes "inf" for infinity.
std::string RenderBudget(RegimeKind kind, const std::optional<privacy::PrivacyBudget>& budget, bool machine);
std::string FormatEpsilon(double epsilon);

struct TrainRegime {
  RegimeKind kind = RegimeKind::kReal;
  std::optional<privacy::PrivacyBudget> budget;
  std::vector<std::string> last_layers = {"norm.", "head."};
};

// Policy of the regime's final (or only) stage.
TrainablePolicy FinalPolicy(RegimeKind kind);

}  // namespace mammodp::classify

#endif  // MAMMODP_CLASSIFY_REGIME_HPP_
