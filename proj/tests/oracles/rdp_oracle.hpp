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

#ifndef MAMMODP_TESTS_ORACLES_RDP_ORACLE_HPP_
#define MAMMODP_TESTS_ORACLES_RDP_ORACLE_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace mammodp::oracle {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;

// Renyi DP of one Poisson-subsampled Gaussian step at an integer order,
// summed term by term in 50-digit floating point with exact binomials.
inline HighPrecision RdpIntegerOrder(double q, double sigma, int alpha) {
  const HighPrecision hq(q);
  const HighPrecision one_minus_q = HighPrecision(1) - hq;
  const HighPrecision two_s2 = HighPrecision(2) * HighPrecision(sigma) * HighPrecision(sigma);
  HighPrecision total = 0;
  HighPrecision binom = 1;
  for (int k = 0; k <= alpha; ++k) {
    if (k > 0) binom = binom * (alpha - k + 1) / k;
    const HighPrecision kk(k);
    total += binom * boost::multiprecision::pow(one_minus_q, alpha - k) * boost::multiprecision::pow(hq, k) *
             boost::multiprecision::exp((kk * kk - kk) / two_s2);
  }
  return boost::multiprecision::log(total) / (alpha - 1);
}

// Fractional orders are bounded by the next integer order.
// Without subsampling the Gaussian mechanism has the exact form a / (2 sigma^2)
// at every real order; otherwise fractional orders round up.
inline HighPrecision Rdp(double q, double sigma, double order) {
  if (q == 1.0) return HighPrecision(order) / (HighPrecision(2) * HighPrecision(sigma) * HighPrecision(sigma));
  return RdpIntegerOrder(q, sigma, static_cast<int>(std::ceil(order)));
}

struct OracleEpsilon {
  double epsilon = std::numeric_limits<double>::infinity();
  double order = 0.0;
};

// min over orders of steps * rdp(a) + log(1 / delta) / (a - 1).
inline OracleEpsilon Epsilon(double q, double sigma, std::int64_t steps, double delta,
                             const std::vector<double>& orders) {
  OracleEpsilon best;
  const HighPrecision log_inv_delta = -boost::multiprecision::log(HighPrecision(delta));
  for (double a : orders) {
    const HighPrecision eps = HighPrecision(steps) * Rdp(q, sigma, a) + log_inv_delta / (HighPrecision(a) - 1);
    const double e = eps.convert_to<double>();
    if (e < best.epsilon) best = {e, a};
  }
  return best;
}

}  // namespace mammodp::oracle

#endif  // MAMMODP_TESTS_ORACLES_RDP_ORACLE_HPP_
