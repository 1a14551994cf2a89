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

#ifndef MAMMODP_EVAL_EXTRACTORS_HPP_
#define MAMMODP_EVAL_EXTRACTORS_HPP_

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mammodp/common/image.hpp"
#include "mammodp/eval/frechet.hpp"

namespace mammodp::eval {

// Maps an image set to a feature matrix (one row per image). Implementations
// must be deterministic and keep a fixed output width.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> ExtractOne(const GrayImage& image) const = 0;

  FeatureMatrix Extract(std::span<const GrayImage> images) const;
};

using ExtractorFactory = std::function<std::unique_ptr<FeatureExtractor>()>;

// Built-in backends:
//   "img-surrogate"  small fixed-weight conv embedder (image-domain FID)
//   "rad-surrogate"  second embedder, different seed and receptive field
//   "radiomics"      the handcrafted radiomics vector
// Large pretrained backbones plug in through RegisterExtractor.
std::unique_ptr<FeatureExtractor> MakeExtractor(const std::string& name);
void RegisterExtractor(const std::string& name, ExtractorFactory factory);
std::vector<std::string> ExtractorNames();

class MissingExtractorError : public ConfigError {
 public:
  explicit MissingExtractorError(const std::string& message) : ConfigError({message}) {}
};

}  // namespace mammodp::eval

#endif  // MAMMODP_EVAL_EXTRACTORS_HPP_
