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

#ifndef MAMMODP_TESTS_ORACLES_FRECHET_ORACLE_HPP_
#define MAMMODP_TESTS_ORACLES_FRECHET_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace mammodp::oracle {

using Real = long double;
using Matrix = std::vector<std::vector<Real>>;

inline Matrix ToMatrix(const std::vector<double>& row_major, std::size_t d) {
  Matrix m(d, std::vector<Real>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m[i][j] = row_major[i * d + j];
  return m;
}

inline Matrix Multiply(const Matrix& a, const Matrix& b) {
  const std::size_t d = a.size();
  Matrix c(d, std::vector<Real>(d, 0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Cyclic Jacobi rotations until the off-diagonal mass vanishes. Returns
// eigenvalues; eigenvectors are the columns of `vectors`.
inline std::vector<Real> JacobiEigen(Matrix a, Matrix& vectors) {
  const std::size_t d = a.size();
  vectors.assign(d, std::vector<Real>(d, 0));
  for (std::size_t i = 0; i < d; ++i) vectors[i][i] = 1;
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off = 0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-36L) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::fabs(a[p][q]) < 1e-300L) continue;
        const Real theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const Real t = (theta >= 0 ? 1 : -1) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        const Real c = 1 / std::sqrt(t * t + 1);
        const Real s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const Real akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const Real apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const Real vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Real> values(d);
  for (std::size_t i = 0; i < d; ++i) values[i] = a[i][i];
  return values;
}

inline Matrix SymmetricSqrt(const Matrix& m) {
  Matrix v;
  const auto lambda = JacobiEigen(m, v);
  const std::size_t d = m.size();
  Matrix r(d, std::vector<Real>(d, 0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) r[i][j] += v[i][k] * std::sqrt(std::max<Real>(0, lambda[k])) * v[j][k];
  return r;
}

// ||mu_a - mu_b||^2 + tr(A) + tr(B) - 2 tr sqrt(A^1/2 B A^1/2).
inline double FrechetDistance(const std::vector<double>& mu_a, const std::vector<double>& cov_a,
                              const std::vector<double>& mu_b, const std::vector<double>& cov_b) {
  const std::size_t d = mu_a.size();
  const Matrix a = ToMatrix(cov_a, d), b = ToMatrix(cov_b, d);
  Real dist = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const Real diff = static_cast<Real>(mu_a[i]) - mu_b[i];
    dist += diff * diff + a[i][i] + b[i][i];
  }
  const Matrix ra = SymmetricSqrt(a);
  Matrix inner = Multiply(Multiply(ra, b), ra);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) inner[i][j] = inner[j][i] = (inner[i][j] + inner[j][i]) / 2;
  Matrix v;
  for (Real l : JacobiEigen(inner, v)) dist -= 2 * std::sqrt(std::max<Real>(0, l));
  return static_cast<double>(dist);
}

}  // namespace mammodp::oracle

#endif  // MAMMODP_TESTS_ORACLES_FRECHET_ORACLE_HPP_
