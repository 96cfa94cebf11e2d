// Copyright 2026 The signopt Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "signopt/numeric.hpp"
#include "signopt/rng.hpp"

namespace signopt {

/// Annealed dither variance sigma_k^2 = alpha * (1 + k)^(-gamma).
struct DitherSchedule {
  double alpha = 0.0;
  double gamma = 0.55;
};

inline double dither_sigma_sq(std::uint64_t k, const DitherSchedule& s) {
  if (!(s.alpha >= 0.0)) throw std::invalid_argument("dither alpha must be >= 0");
  if (!(s.gamma > 0.0)) throw std::invalid_argument("dither gamma must be > 0");
  if (s.alpha == 0.0) return 0.0;
  return s.alpha * std::pow(1.0 + static_cast<double>(k), -s.gamma);
}

/// Standard normal CDF through erfc; accurate to a few ulps everywhere.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Probability that sign(m + xi) == sign(m) for xi ~ N(0, sigma^2).
inline double correct_sign_prob(double m, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("correct_sign_prob: negative sigma");
  if (sigma == 0.0) {
    if (m == 0.0) throw std::domain_error("correct_sign_prob: sign undefined for m = 0, sigma = 0");
    return 1.0;
  }
  return normal_cdf(std::abs(m) / sigma);
}

/// E[sign(m + xi)] = 2 Phi(m / sigma) - 1 = erf(m / (sigma sqrt 2)).
///
/// Evaluated through erf directly so the result is exactly odd in m and
/// keeps full relative precision for small m / sigma.
inline double expected_dithered_sign(double m, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("expected_dithered_sign: negative sigma");
  if (sigma == 0.0) return sign(m);
  return std::erf(m / (sigma * std::numbers::sqrt2));
}

/// m sqrt(2/pi) / sigma: the small-ratio linearization of the expectation.
inline double dithered_sign_first_order(double m, double sigma) {
  return m * std::sqrt(2.0 / std::numbers::pi) / sigma;
}

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

/// Monte Carlo mean of sign(m + xi), xi ~ N(0, sigma^2), with standard error.
inline McEstimate mc_dithered_sign(double m, double sigma, std::uint64_t trials, RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("mc_dithered_sign: trials must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("mc_dithered_sign: negative sigma");
  if (sigma == 0.0) return {sign(m), 0.0};
  // sign takes values in {-1, 0, 1}; accumulate counts exactly
  std::int64_t total = 0;
  std::uint64_t nonzero = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const double s = sign(m + sigma * rng.normal());
    total += static_cast<std::int64_t>(s);
    nonzero += (s != 0.0);
  }
  const double n = static_cast<double>(trials);
  const double mean = static_cast<double>(total) / n;
  const double second = static_cast<double>(nonzero) / n;
  const double var = std::max(0.0, second - mean * mean);
  return {mean, trials > 1 ? std::sqrt(var * n / (n - 1.0) / n) : 0.0};
}

}  // namespace signopt
