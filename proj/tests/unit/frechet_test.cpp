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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mammodp/eval/frechet.hpp"
#include "oracles/frechet_oracle.hpp"

namespace mammodp::eval {
namespace {

GaussianSummary Summary(std::vector<double> mean, std::vector<double> cov) {
  GaussianSummary s;
  s.dim = mean.size();
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  return s;
}

GaussianSummary RandomPsd(std::size_t d, std::mt19937_64& rng, std::size_t rank) {
  std::normal_distribution<double> n(0, 1);
  std::vector<double> l(d * rank);
  for (auto& x : l) x = n(rng);
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < rank; ++k) cov[i * d + j] += l[i * rank + k] * l[j * rank + k];
  std::vector<double> mean(d);
  for (auto& x : mean) x = n(rng);
  return Summary(std::move(mean), std::move(cov));
}

TEST(FitGaussian, IdenticalRowsHaveZeroCovariance) {
  FeatureMatrix m(2, 3);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) m.at(r, c) = c + 1.5;
  const auto s = FitGaussian(m);
  EXPECT_EQ(s.mean, (std::vector<double>{1.5, 2.5, 3.5}));
  for (double v : s.cov) EXPECT_EQ(v, 0.0);
}

TEST(FitGaussian, UnbiasedDenominator) {
  FeatureMatrix m(2, 2);
  m.at(1, 0) = 2;
  m.at(1, 1) = 2;
  const auto s = FitGaussian(m);
  EXPECT_EQ(s.mean, (std::vector<double>{1, 1}));
  EXPECT_EQ(s.cov, (std::vector<double>{2, 2, 2, 2}));
}

TEST(FitGaussian, StandardNormalConcentration) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  FeatureMatrix m(10000, 3);
  for (auto& x : m.data) x = n(rng);
  const auto s = FitGaussian(m);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(s.mean[i], 0.0, 0.05);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s.cov[i * 3 + j], i == j ? 1.0 : 0.0, 0.1);
  }
}

TEST(FitGaussian, NeedsTwoRows) {
  EXPECT_THROW(FitGaussian(FeatureMatrix(1, 2)), InsufficientSamplesError);
}

TEST(Frechet, ClosedForms) {
  EXPECT_NEAR(FrechetDistance(Summary({0}, {1}), Summary({3}, {1})), 9.0, 1e-9);
  EXPECT_NEAR(FrechetDistance(Summary({0}, {4}), Summary({0}, {1})), 1.0, 1e-9);
  EXPECT_NEAR(FrechetDistance(Summary({1, 2}, {1, 0, 0, 4}), Summary({1, 2}, {1, 0, 0, 1})), 1.0, 1e-9);
}

TEST(Frechet, SelfDistanceAndSymmetry) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto a = RandomPsd(4, rng, 4), b = RandomPsd(4, rng, 2);
    EXPECT_NEAR(FrechetDistance(a, a), 0.0, 1e-9);
    EXPECT_NEAR(FrechetDistance(a, b), FrechetDistance(b, a), 1e-9 * std::max(1.0, FrechetDistance(a, b)));
    EXPECT_GE(FrechetDistance(a, b), 0.0);
  }
}

TEST(Frechet, RandomPairsMatchEigenOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const std::size_t d = 1 + i % 5;
    const auto a = RandomPsd(d, rng, d), b = RandomPsd(d, rng, 1 + (i / 5) % d);
    const double want = oracle::FrechetDistance(a.mean, a.cov, b.mean, b.cov);
    EXPECT_NEAR(FrechetDistance(a, b), want, 1e-6 * std::max(1.0, std::fabs(want))) << "pair " << i;
  }
}

TEST(Frechet, DimensionMismatchIsContractViolation) {
  EXPECT_THROW(FrechetDistance(Summary({0}, {1}), Summary({0, 0}, {1, 0, 0, 1})), ContractViolation);
}

}  // namespace
}  // namespace mammodp::eval
