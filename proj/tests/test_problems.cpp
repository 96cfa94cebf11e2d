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
#include <vector>

#include <gtest/gtest.h>

#include "signopt/problems.hpp"

namespace signopt {
namespace {

NoiseSpec noiseless(std::size_t dim) { return {NoiseFamily::kGaussian, ParamVector(dim, 0.0), 0.1}; }

ParamVector central_difference(const Problem& p, const ParamVector& x, double h) {
  ParamVector g(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    ParamVector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (p.eval_f(a) - p.eval_f(b)) / (2.0 * h);
  }
  return g;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Quadratic, WorkedValues) {
  const Problem p = make_quadratic({1.0, 4.0}, {0.0, 0.0}, noiseless(2));
  EXPECT_EQ(p.eval_f({1.0, 1.0}), 2.5);
  EXPECT_EQ(p.eval_grad({1.0, 1.0}), (ParamVector{1.0, 4.0}));
  EXPECT_EQ(p.eval_f({0.0, 0.0}), 0.0);
  EXPECT_EQ(p.f_star, 0.0);
  EXPECT_EQ(p.l1_lipschitz(), 5.0);
}

TEST(Quadratic, ShiftedOptimum) {
  const Problem p = make_quadratic({2.0, 2.0, 2.0}, {1.0, -1.0, 0.5}, noiseless(3));
  EXPECT_EQ(p.eval_f({1.0, -1.0, 0.5}), 0.0);
  EXPECT_EQ(p.eval_grad({1.0, -1.0, 0.5}), ParamVector(3, 0.0));
  EXPECT_LT(max_abs_diff(p.eval_grad({0.3, 0.2, -0.7}), central_difference(p, {0.3, 0.2, -0.7}, 1e-5)), 1e-8);
}

TEST(Quadratic, RejectsBadInputs) {
  EXPECT_THROW(make_quadratic({1.0, -1.0}, {0.0, 0.0}, noiseless(2)), std::invalid_argument);
  EXPECT_THROW(make_quadratic({1.0}, {0.0, 0.0}, noiseless(2)), DimensionMismatch);
  EXPECT_THROW(make_quadratic({1.0, 1.0}, {0.0, 0.0}, noiseless(3)), DimensionMismatch);
  NoiseSpec neg{NoiseFamily::kGaussian, {1.0, -0.5}, 0.1};
  EXPECT_THROW(make_quadratic({1.0, 1.0}, {0.0, 0.0}, neg), std::invalid_argument);
  NoiseSpec bad_q{NoiseFamily::kAsymmetricBimodal, {1.0, 1.0}, 1.0};
  EXPECT_THROW(make_quadratic({1.0, 1.0}, {0.0, 0.0}, bad_q), std::invalid_argument);
}

TEST(Logistic, NonnegativeAndConvex) {
  const Problem p = make_logistic(3, 5, 50, noiseless(5));
  RngStream rng(9, 0);
  for (int t = 0; t < 200; ++t) {
    const ParamVector x = sample_gaussian(5, 0.0, 2.0, rng);
    const ParamVector y = sample_gaussian(5, 0.0, 2.0, rng);
    ParamVector mid = scaled(axpy(x, 1.0, y), 0.5);
    EXPECT_GE(p.eval_f(x), 0.0);
    EXPECT_LE(p.eval_f(mid), 0.5 * (p.eval_f(x) + p.eval_f(y)) + 1e-12);
  }
}

TEST(Logistic, GradientMatchesFiniteDifference) {
  const Problem p = make_logistic(11, 4, 30, noiseless(4));
  RngStream rng(2, 0);
  const ParamVector x = sample_gaussian(4, 0.0, 1.0, rng);
  EXPECT_LT(max_abs_diff(p.eval_grad(x), central_difference(p, x, 1e-5)), 1e-8);
  EXPECT_NEAR(p.eval_f(ParamVector(4, 0.0)), std::numbers::ln2, 1e-15);
}

TEST(Mlp, ZeroWeightsGiveLog2) {
  const Problem p = make_mlp(1, {3, 4, 1}, noiseless(MlpLayout{{3, 4, 1}}.num_params()), 20);
  EXPECT_EQ(p.dim, 3u * 4 + 4 + 4 + 1);
  EXPECT_NEAR(p.eval_f(ParamVector(p.dim, 0.0)), std::numbers::ln2, 1e-15);
}

TEST(Mlp, HiddenUnitPermutationInvariance) {
  const std::vector<std::size_t> widths{3, 4, 1};
  const MlpLayout layout{widths};
  const Problem p = make_mlp(5, widths, noiseless(layout.num_params()), 24);
  const ParamVector& theta = p.x0;
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  ParamVector permuted = theta;
  const std::size_t w0 = layout.weight_offset(0), b0 = layout.bias_offset(0), w1 = layout.weight_offset(1);
  for (std::size_t h = 0; h < 4; ++h) {
    for (std::size_t i = 0; i < 3; ++i) permuted[w0 + h * 3 + i] = theta[w0 + perm[h] * 3 + i];
    permuted[b0 + h] = theta[b0 + perm[h]];
    permuted[w1 + h] = theta[w1 + perm[h]];
  }
  EXPECT_NE(permuted, theta);
  EXPECT_NEAR(p.eval_f(permuted), p.eval_f(theta), 1e-14);
}

TEST(Mlp, GradientMatchesFiniteDifference) {
  const std::vector<std::size_t> widths{2, 3, 3, 1};
  const Problem p = make_mlp(8, widths, noiseless(MlpLayout{widths}.num_params()), 16);
  const ParamVector g = p.eval_grad(p.x0);
  EXPECT_LT(max_abs_diff(g, central_difference(p, p.x0, 1e-5)), 1e-8);
}

TEST(Mlp, RejectsBadLayout) {
  EXPECT_THROW(make_mlp(0, {3, 1}, noiseless(4)), std::invalid_argument);
  EXPECT_THROW(make_mlp(0, {3, 2, 2}, noiseless(14)), std::invalid_argument);
}

TEST(Smoothness, CoordinateUpperBound) {
  // f(x + t e_i) <= f(x) + t g_i + L_i t^2 / 2 for every coordinate step
  const Problem quad = make_quadratic({0.5, 1.0, 3.0}, {0.2, -0.1, 0.0}, noiseless(3));
  const Problem logi = make_logistic(4, 3, 40, noiseless(3));
  RngStream rng(31, 0);
  for (const Problem* p : {&quad, &logi}) {
    for (int trial = 0; trial < 200; ++trial) {
      const ParamVector x = sample_gaussian(3, 0.0, 1.5, rng);
      const ParamVector g = p->eval_grad(x);
      const double fx = p->eval_f(x);
      for (std::size_t i = 0; i < 3; ++i) {
        const double t = 2.0 * rng.normal();
        ParamVector y = x;
        y[i] += t;
        EXPECT_LE(p->eval_f(y), fx + t * g[i] + 0.5 * p->lipschitz[i] * t * t + 1e-12) << p->kind;
      }
    }
  }
}

TEST(Noise, UnitVarianceAndSkewness) {
  constexpr std::size_t kN = 1000000;
  const double q = 0.1;
  for (auto family : {NoiseFamily::kGaussian, NoiseFamily::kUniform, NoiseFamily::kLaplace,
                      NoiseFamily::kAsymmetricBimodal}) {
    RngStream rng(77, static_cast<std::uint64_t>(family));
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (std::size_t t = 0; t < kN; ++t) {
      const double v = sample_unit_noise(family, rng, q);
      m1 += v;
      m2 += v * v;
      m3 += v * v * v;
    }
    m1 /= kN;
    m2 /= kN;
    m3 /= kN;
    const double var = m2 - m1 * m1;
    const double skew = (m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1) / std::pow(var, 1.5);
    EXPECT_NEAR(m1, 0.0, 5e-3) << to_string(family);
    EXPECT_NEAR(var, 1.0, 0.01) << to_string(family);
    if (family == NoiseFamily::kAsymmetricBimodal) {
      EXPECT_NEAR(skew, (1.0 - 2.0 * q) / std::sqrt(q * (1.0 - q)), 0.05);
    } else {
      EXPECT_NEAR(skew, 0.0, 0.05) << to_string(family);
    }
  }
}

TEST(Noise, FamilyNamesRoundTrip) {
  for (auto family : {NoiseFamily::kGaussian, NoiseFamily::kUniform, NoiseFamily::kLaplace,
                      NoiseFamily::kAsymmetricBimodal}) {
    EXPECT_EQ(parse_noise_family(to_string(family)), family);
  }
  EXPECT_THROW(parse_noise_family("cauchy"), std::invalid_argument);
}

TEST(StochasticGrad, UnbiasedAndVarianceScalesWithBatch) {
  constexpr std::size_t kSamples = 100000;
  NoiseSpec noise{NoiseFamily::kLaplace, {1.0, 2.0}, 0.1};
  const Problem p = make_quadratic({1.0, 1.0}, {0.0, 0.0}, noise);
  const ParamVector x{0.5, -0.25};
  const ParamVector g = p.eval_grad(x);
  double var[2][2] = {};
  for (std::size_t n : {1u, 4u}) {
    RngStream rng(3, n);
    ParamVector mean(2, 0.0), sq(2, 0.0);
    for (std::size_t t = 0; t < kSamples; ++t) {
      const GradSample s = stochastic_grad(p, x, n, rng);
      EXPECT_EQ(s.batch_size, n);
      for (std::size_t i = 0; i < 2; ++i) {
        mean[i] += s.grad[i];
        sq[i] += (s.grad[i] - g[i]) * (s.grad[i] - g[i]);
      }
    }
    for (std::size_t i = 0; i < 2; ++i) {
      mean[i] /= kSamples;
      const double sd = noise.sigma[i] / std::sqrt(static_cast<double>(n));
      EXPECT_NEAR(mean[i], g[i], 4.0 * sd / std::sqrt(static_cast<double>(kSamples)));
      var[n == 1 ? 0 : 1][i] = sq[i] / kSamples;
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const double ratio = var[1][i] / var[0][i];
    EXPECT_GE(ratio, 0.22);
    EXPECT_LE(ratio, 0.28);
  }
}

TEST(StochasticGrad, NoiselessIsExactAndReproducible) {
  const Problem p = make_quadratic({1.0, 2.0}, {0.0, 0.0}, noiseless(2));
  RngStream rng(1, 0), untouched(1, 0);
  EXPECT_EQ(stochastic_grad(p, {1.0, 1.0}, 8, rng).grad, (ParamVector{1.0, 2.0}));
  EXPECT_EQ(rng.next_u64(), untouched.next_u64());

  NoiseSpec noise{NoiseFamily::kGaussian, {1.0, 1.0}, 0.1};
  const Problem q = make_quadratic({1.0, 2.0}, {0.0, 0.0}, noise);
  RngStream a(5, 0), b(5, 0);
  EXPECT_EQ(stochastic_grad(q, {1.0, 1.0}, 3, a).grad, stochastic_grad(q, {1.0, 1.0}, 3, b).grad);
  EXPECT_THROW(stochastic_grad(q, {1.0, 1.0}, 0, a), std::invalid_argument);
}

}  // namespace
}  // namespace signopt
