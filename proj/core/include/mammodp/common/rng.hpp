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

#ifndef MAMMODP_COMMON_RNG_HPP_
#define MAMMODP_COMMON_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace mammodp {

using Rng = std::mt19937_64;

// Mixes a base seed with stream identifiers (epoch, sample index, subset
// index, ...) so that randomness is keyed by position, never by worker.
std::uint64_t DeriveSeed(std::uint64_t base, std::initializer_list<std::uint64_t> streams);

inline Rng MakeRng(std::uint64_t base, std::initializer_list<std::uint64_t> streams = {}) {
  return Rng(DeriveSeed(base, streams));
}

std::string SerializeRng(const Rng& rng);
Rng DeserializeRng(const std::string& state);

}  // namespace mammodp

#endif  // MAMMODP_COMMON_RNG_HPP_
