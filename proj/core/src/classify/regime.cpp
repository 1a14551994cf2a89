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

#include "mammodp/classify/regime.hpp"

#include <sstream>

namespace mammodp::classify {

RegimeKind ParseRegime(std::string_view token) {
  for (RegimeKind k : AllRegimes()) {
    if (token == RegimeToken(k) || token == RegimeLabel(k)) return k;
  }
  throw ConfigError({"unknown regime '" + std::string(token) + "' (expected real, syn, synpre, real+syn, synpre+realft)"});
}

std::string RegimeToken(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::kReal: return "real";
    case RegimeKind::kSyn: return "syn";
    case RegimeKind::kSynPre: return "synpre";
    case RegimeKind::kRealPlusSyn: return "real+syn";
    case RegimeKind::kSynPreThenRealFT: return "synpre+realft";
  }
  return "?";
}

std::string RegimeLabel(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::kReal: return "Real";
    case RegimeKind::kSyn: return "Syn";
    case RegimeKind::kSynPre: return "SynPre";
    case RegimeKind::kRealPlusSyn: return "Real+Syn";
    case RegimeKind::kSynPreThenRealFT: return "SynPre+RealFT";
  }
  return "?";
}

std::vector<RegimeKind> AllRegimes() {
  return {RegimeKind::kReal, RegimeKind::kSyn, RegimeKind::kSynPre, RegimeKind::kRealPlusSyn,
          RegimeKind::kSynPreThenRealFT};
}

bool UsesRealData(RegimeKind kind) { return kind != RegimeKind::kSyn && kind != RegimeKind::kSynPre; }
bool UsesSyntheticData(RegimeKind kind) { return kind != RegimeKind::kReal; }
bool PrivacyApplies(RegimeKind kind) { return UsesRealData(kind); }

std::optional<privacy::PrivacyBudget> EffectiveBudget(RegimeKind kind,
                                                      const std::optional<privacy::PrivacyBudget>& requested) {
  if (!PrivacyApplies(kind)) return std::nullopt;
  return requested;
}

std::string FormatEpsilon(double epsilon) {
  std::ostringstream os;
  os << epsilon;
  return os.str();
}

std::string RenderBudget(RegimeKind kind, const std::optional<privacy::PrivacyBudget>& budget, bool machine) {
  const std::string inf = machine ? "inf" : "∞";
  const auto effective = EffectiveBudget(kind, budget);
  const std::string eps = effective ? FormatEpsilon(effective->epsilon) : inf;
  if (kind == RegimeKind::kSynPreThenRealFT) return inf + "|" + eps;
  return eps;
}

TrainablePolicy FinalPolicy(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::kSynPre: return TrainablePolicy::kAllParams;
    case RegimeKind::kSynPreThenRealFT: return TrainablePolicy::kLastTwoLayers;
    default: return TrainablePolicy::kHeadOnly;
  }
}

}  // namespace mammodp::classify
