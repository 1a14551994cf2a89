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

#ifndef MAMMODP_NN_OPTIM_HPP_
#define MAMMODP_NN_OPTIM_HPP_

#include <string>
#include <vector>

#include "mammodp/common/container.hpp"
#include "mammodp/nn/tensor.hpp"

namespace mammodp::nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  bool decoupled_weight_decay = false;  // true gives AdamW
};

// Adaptive-moment optimizer over a fixed parameter list. Parameters without
// a gradient in a step are left untouched.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  void Step();
  void ZeroGrad();
  const std::vector<Tensor>& params() const { return params_; }
  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_; }

  void Store(BlobContainer& out, const std::string& prefix) const;
  void Load(const BlobContainer& in, const std::string& prefix);

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long step_ = 0;
};

}  // namespace mammodp::nn

#endif  // MAMMODP_NN_OPTIM_HPP_
