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

#include "mammodp/ingest/records.hpp"

#include <cmath>

namespace mammodp::ingest {
namespace {

template <typename E, std::size_t N>
E ParseEnum(std::string_view s, const std::pair<const char*, E> (&table)[N], const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw ContractViolation(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::pair<const char*, View> kViews[] = {{"CC", View::kCC}, {"MLO", View::kMLO}, {"NA", View::kNA}};
constexpr std::pair<const char*, Label> kLabels[] = {{"benign", Label::kBenign}, {"malignant", Label::kMalignant}};
constexpr std::pair<const char*, Source> kSources[] = {{"CBIS_DDSM", Source::kCbisDdsm},
                                                       {"BCDR", Source::kBcdr},
                                                       {"FIXTURE", Source::kFixture},
                                                       {"SYNTHETIC", Source::kSynthetic}};
constexpr std::pair<const char*, Split> kSplits[] = {{"train", Split::kTrain}, {"val", Split::kVal}, {"test", Split::kTest}};

template <typename E, std::size_t N>
std::string NameOf(E value, const std::pair<const char*, E> (&table)[N]) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

}  // namespace

std::string ToString(View v) { return NameOf(v, kViews); }
std::string ToString(Label l) { return NameOf(l, kLabels); }
std::string ToString(Source s) { return NameOf(s, kSources); }
std::string ToString(Split s) { return NameOf(s, kSplits); }
View ParseView(std::string_view s) { return ParseEnum(s, kViews, "view"); }
Label ParseLabel(std::string_view s) { return ParseEnum(s, kLabels, "label"); }
Source ParseSource(std::string_view s) { return ParseEnum(s, kSources, "source"); }
Split ParseSplit(std::string_view s) { return ParseEnum(s, kSplits, "split"); }

void ValidatePatch(const MassPatch& patch, int min_side) {
  if (!patch.pixels.square()) throw ContractViolation("mass patch is not square");
  if (patch.side() < min_side) throw ContractViolation("mass patch side below " + std::to_string(min_side));
  for (double v : patch.pixels.pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("mass patch intensity outside [0, 1]");
  }
}

}  // namespace mammodp::ingest
