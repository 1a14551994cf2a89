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

#include "mammodp/eval/frechet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mammodp/common/errors.hpp"

namespace mammodp::eval {
namespace {

using Mat = Eigen::MatrixXd;

Mat ToMatrix(const GaussianSummary& g) {
  Mat m(g.dim, g.dim);
  for (std::size_t i = 0; i < g.dim; ++i)
    for (std::size_t j = 0; j < g.dim; ++j) m(i, j) = g.cov[i * g.dim + j];
  return m;
}

// Square roots of eigenvalues, with those below the solver's resolution
// taken as exact zeros.
Eigen::VectorXd RootsOf(const Eigen::VectorXd& lambda) {
  if (lambda.size() == 0) return lambda;
  const double scale = lambda.cwiseAbs().maxCoeff();
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(lambda.size()) * scale;
  return lambda.unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
}

Mat SymmetricSqrt(const Mat& m) {
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  const Eigen::VectorXd roots = RootsOf(eig.eigenvalues());
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

GaussianSummary FitGaussian(const FeatureMatrix& features) {
  if (features.rows < 2) {
    throw InsufficientSamplesError("Gaussian fit needs at least 2 samples, got " + std::to_string(features.rows));
  }
  const std::size_t n = features.rows, d = features.cols;
  GaussianSummary g;
  g.dim = d;
  g.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) g.mean[c] += features.at(r, c);
  for (double& m : g.mean) m /= static_cast<double>(n);
  g.cov.assign(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = features.at(r, i) - g.mean[i];
      for (std::size_t j = i; j < d; ++j) g.cov[i * d + j] += di * (features.at(r, j) - g.mean[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      g.cov[i * d + j] /= static_cast<double>(n - 1);
      g.cov[j * d + i] = g.cov[i * d + j];
    }
  }
  return g;
}

double FrechetDistance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.dim != b.dim || a.mean.size() != a.dim || b.mean.size() != b.dim || a.cov.size() != a.dim * a.dim ||
      b.cov.size() != b.dim * b.dim) {
    throw ContractViolation("Frechet distance between summaries of different dimension");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.dim; ++i) mean_term += (a.mean[i] - b.mean[i]) * (a.mean[i] - b.mean[i]);
  const Mat sa = ToMatrix(a), sb = ToMatrix(b);
  const Mat root_a = SymmetricSqrt(sa);
  const Mat inner = root_a * sb * root_a;
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  const double tr_sqrt = RootsOf(eig.eigenvalues()).sum();
  const double distance = mean_term + sa.trace() + sb.trace() - 2.0 * tr_sqrt;
  const double noise_floor = 1e-6 * std::max(1.0, sa.trace() + sb.trace());
  if (distance < 0.0) {
    if (distance < -noise_floor) throw Error("Frechet distance numerically negative: " + std::to_string(distance));
    return 0.0;
  }
  return distance;
}

}  // namespace mammodp::eval
