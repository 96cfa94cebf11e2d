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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "signopt/dither.hpp"

namespace signopt {
namespace {

TEST(Schedule, WorkedValues) {
  EXPECT_EQ(dither_sigma_sq(0, {0.1, 0.55}), 0.1);
  // 0.1 * 2^-0.55, evaluated independently with Python's decimal module
  EXPECT_NEAR(dither_sigma_sq(1, {0.1, 0.55}), 0.06830201283771978, 1e-17);
  EXPECT_EQ(dither_sigma_sq(1000, {0.0, 0.55}), 0.0);
}

TEST(Schedule, MonotoneDecreasing) {
  double prev = dither_sigma_sq(0, {0.5, 0.55});
  for (std::uint64_t k = 1; k < 10000; k += 7) {
    const double cur = dither_sigma_sq(k, {0.5, 0.55});
    ASSERT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Schedule, RejectsBadParameters) {
  EXPECT_THROW(dither_sigma_sq(0, {-0.1, 0.55}), std::invalid_argument);
  EXPECT_THROW(dither_sigma_sq(0, {0.1, 0.0}), std::invalid_argument);
}

TEST(CorrectSign, WorkedValues) {
  EXPECT_EQ(correct_sign_prob(0.0, 1.0), 0.5);
  EXPECT_NEAR(correct_sign_prob(1.0, 1.0), 0.841345, 5e-7);
  EXPECT_NEAR(correct_sign_prob(-2.0, 2.0), 0.841345, 5e-7);
  EXPECT_EQ(correct_sign_prob(3.0, 0.0), 1.0);
  EXPECT_THROW(correct_sign_prob(0.0, 0.0), std::domain_error);
  EXPECT_THROW(correct_sign_prob(1.0, -1.0), std::invalid_argument);
}

TEST(NormalCdf, TableValues) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(normal_cdf(-1.0), 0.15865525393145707, 1e-15);
  EXPECT_NEAR(normal_cdf(-2.0), 0.022750131948179195, 1e-16);
  EXPECT_NEAR(normal_cdf(-8.0), 6.220960574271784e-16, 1e-28);
}

TEST(ExpectedSign, WorkedValues) {
  EXPECT_EQ(expected_dithered_sign(0.0, 1.0), 0.0);
  EXPECT_NEAR(expected_dithered_sign(1.0, 1.0), 0.682689, 5e-7);
  EXPECT_EQ(expected_dithered_sign(-0.5, 0.0), -1.0);
  EXPECT_EQ(expected_dithered_sign(0.0, 0.0), 0.0);
}

TEST(ExpectedSign, MatchesTwoCdfMinusOne) {
  for (double m = -4.0; m <= 4.0; m += 0.125) {
    EXPECT_NEAR(expected_dithered_sign(m, 1.3), 2.0 * normal_cdf(m / 1.3) - 1.0, 1e-15);
  }
}

TEST(ExpectedSign, OddBoundedMonotone) {
  double prev = -1.0;
  for (double m = -6.0; m <= 6.0; m += 0.01) {
    const double e = expected_dithered_sign(m, 0.7);
    ASSERT_EQ(e, -expected_dithered_sign(-m, 0.7));
    ASSERT_LE(std::abs(e), 1.0);
    ASSERT_GE(e, prev);
    prev = e;
  }
}

TEST(ExpectedSign, FirstOrderExpansion) {
  const double exact = expected_dithered_sign(0.01, 1.0);
  const double linear = dithered_sign_first_order(0.01, 1.0);
  EXPECT_NEAR(linear, 0.0079788, 5e-8);
  EXPECT_LE(std::abs(exact - linear), 1e-4 * linear);
}

TEST(ExpectedSign, ThirdOrderRemainder) {
  // erf(x/sqrt2) = sqrt(2/pi)(x - x^3/6 + x^5/40 - ...), alternating with
  // decreasing terms for |x| <= 1, so the linearization error is bounded by
  // the cubic term.
  const double c = std::sqrt(2.0 / std::numbers::pi);
  for (double x = -0.1; x <= 0.1; x += 0.0005) {
    const double err = std::abs(expected_dithered_sign(x, 1.0) - dithered_sign_first_order(x, 1.0));
    ASSERT_LE(err, c * std::abs(x * x * x) / 6.0 * (1.0 + 1e-9) + 1e-17);
    if (std::abs(x) <= 0.08) {
      ASSERT_LE(err, 1e-3 * std::abs(x) + 1e-17);
    }
  }
}

TEST(MonteCarlo, DegenerateSigma) {
  RngStream rng(0, 0);
  const auto est = mc_dithered_sign(-0.3, 0.0, 10, rng);
  EXPECT_EQ(est.mean, -1.0);
  EXPECT_EQ(est.std_err, 0.0);
}

TEST(MonteCarlo, AgreesWithClosedFormOnGrid) {
  RngStream rng(2024, 0);
  for (double ratio : {-2.0, -1.0, -0.25, 0.0, 0.1, 0.5, 1.0, 3.0}) {
    const auto est = mc_dithered_sign(ratio * 0.8, 0.8, 200000, rng);
    EXPECT_NEAR(est.mean, expected_dithered_sign(ratio * 0.8, 0.8), 4.0 * est.std_err + 1e-12) << ratio;
  }
}

TEST(MonteCarlo, UnitRatioMillionTrials) {
  RngStream rng(99, 0);
  const auto pos = mc_dithered_sign(1.0, 1.0, 1000000, rng);
  EXPECT_NEAR(pos.mean, 0.682689, 3.0 * pos.std_err);
  const auto neg = mc_dithered_sign(-1.0, 1.0, 1000000, rng);
  EXPECT_NEAR(neg.mean, -0.682689, 3.0 * neg.std_err);
}

}  // namespace
}  // namespace signopt
