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

#ifndef MAMMODP_EVAL_FRECHET_HPP_
#define MAMMODP_EVAL_FRECHET_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "mammodp/common/errors.hpp"

namespace mammodp::eval {

// Row-major n x d matrix, one row per image.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct GaussianSummary {
  std::size_t dim = 0;
  std::vector<double> mean;
  std::vector<double> cov;  // dim x dim, row-major, symmetric
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

// Column means and unbiased (n - 1) covariance. Requires n >= 2.
GaussianSummary FitGaussian(const FeatureMatrix& features);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2).
// The inner root comes from a symmetric eigendecomposition with negative
// eigenvalues clamped to 0, so no complex arithmetic is involved.
double FrechetDistance(const GaussianSummary& a, const GaussianSummary& b);

}  // namespace mammodp::eval

#endif  // MAMMODP_EVAL_FRECHET_HPP_
