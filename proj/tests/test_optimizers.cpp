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
#include <cstdint>
#include <limits>

#include <gtest/gtest.h>

#include "signopt/dither.hpp"
#include "signopt/optimizers.hpp"

namespace signopt {
namespace {

OptimizerConfig base_cfg() {
  OptimizerConfig cfg;
  cfg.delta = 0.1;
  cfg.beta = 0.9;
  return cfg;
}

OptimizerState state_at(const ParamVector& x) { return make_state(x, base_cfg()); }

TEST(Sgd, WorkedValues) {
  EXPECT_EQ(sgd_step(state_at({1, 1}), {2, -2}, 0.5).x, (ParamVector{0, 2}));
  EXPECT_EQ(sgd_step(state_at({1, 1}), {2, -2}, 0.0).x, (ParamVector{1, 1}));
  EXPECT_EQ(sgd_step(state_at({1, 1}), {0, 0}, 0.5).x, (ParamVector{1, 1}));
  EXPECT_EQ(sgd_step(state_at({1, 1}), {0, 0}, 0.5).k, 1u);
  EXPECT_THROW(sgd_step(state_at({1, 1}), {0, 0, 0}, 0.5), DimensionMismatch);
}

TEST(SgdM, MomentumIsEma) {
  OptimizerState s = sgdm_step(state_at({0, 0}), {1, -1}, 1.0, 0.9);
  EXPECT_NEAR(s.m[0], 0.1, 1e-16);
  EXPECT_NEAR(s.x[0], -0.1, 1e-16);
  EXPECT_NEAR(s.x[1], 0.1, 1e-16);
}

TEST(SignSgd, WorkedValues) {
  const auto s = signsgd_step(state_at({0, 0}), {3, -2}, base_cfg());
  EXPECT_EQ(s.x, (ParamVector{-0.1, 0.1}));
  EXPECT_EQ(signsgd_step(state_at({0.5, 0.5}), {0, 0}, base_cfg()).x, (ParamVector{0.5, 0.5}));
}

TEST(SignSgdM, FirstStep) {
  const auto s = signsgdm_step(state_at({0, 0}), {1, -1}, base_cfg());
  EXPECT_NEAR(s.m[0], 0.1, 1e-16);
  EXPECT_NEAR(s.m[1], -0.1, 1e-16);
  EXPECT_EQ(s.x, (ParamVector{-0.1, 0.1}));
}

TEST(SignSgdM, EmaFixedPoint) {
  // m_k = c (1 - beta^k) exactly in exact arithmetic
  OptimizerState s = state_at({0, 0});
  const ParamVector c{2.0, -0.5};
  for (int k = 1; k <= 300; ++k) {
    s = signsgdm_step(std::move(s), c, base_cfg());
    const double factor = 1.0 - std::pow(0.9, k);
    ASSERT_NEAR(s.m[0], 2.0 * factor, 1e-12);
    ASSERT_NEAR(s.m[1], -0.5 * factor, 1e-12);
  }
  EXPECT_NEAR(s.m[0], 2.0, 1e-12);
}

TEST(SignSgdM, StepGeometry) {
  RngStream rng(4, 0);
  OptimizerState s = state_at(ParamVector(6, 0.25));
  const auto cfg = base_cfg();
  for (int k = 0; k < 200; ++k) {
    const ParamVector g = sample_gaussian(6, 0.0, 1.0, rng);
    const OptimizerState next = signsgdm_step(s, g, cfg);
    for (std::size_t i = 0; i < 6; ++i) {
      const double xi = s.x[i], xn = next.x[i];
      ASSERT_TRUE(xn == xi || xn == xi - cfg.delta || xn == xi + cfg.delta);
    }
    s = next;
  }
}

TEST(Dithered, ZeroAlphaMatchesSignSgdMBitwise) {
  for (auto mode : {DitherMode::kPre, DitherMode::kPost}) {
    OptimizerConfig cfg = base_cfg();
    cfg.dither_mode = mode;
    cfg.alpha = 0.0;
    RngStream noise(8, 0), dither(8, 1);
    OptimizerState a = state_at(ParamVector(5, 1.0)), b = a;
    for (int k = 0; k < 100; ++k) {
      const ParamVector g = sample_gaussian(5, 0.3, 1.0, noise);
      a = dithered_step(std::move(a), g, cfg, dither);
      b = signsgdm_step(std::move(b), g, cfg);
      ASSERT_EQ(a.x, b.x);
      ASSERT_EQ(a.m, b.m);
    }
  }
}

TEST(Dithered, NoneModeRejected) {
  RngStream r(0, 0);
  EXPECT_THROW(dithered_step(state_at({0}), {1}, base_cfg(), r), std::invalid_argument);
}

TEST(Dithered, PreModeStepProbability) {
  // scalar momentum equal to sigma_k: P[step = -delta] = Phi(1)
  constexpr std::uint64_t kTrials = 1000000;
  OptimizerConfig cfg = base_cfg();
  cfg.dither_mode = DitherMode::kPre;
  cfg.alpha = 0.25;  // sigma_0 = 0.5
  cfg.beta = 0.0;
  const double sigma = std::sqrt(dither_sigma_sq(0, cfg.schedule()));
  RngStream rng(21, 0);
  std::uint64_t down = 0;
  for (std::uint64_t t = 0; t < kTrials; ++t) {
    const auto s = dithered_step(state_at({0.0}), {sigma}, cfg, rng);
    down += s.x[0] < 0.0;
  }
  const double p = static_cast<double>(down) / kTrials;
  const double se = std::sqrt(p * (1.0 - p) / kTrials);
  EXPECT_NEAR(p, normal_cdf(1.0), 3.0 * se);
}

TEST(Dithered, PostModeMeanStep) {
  constexpr std::uint64_t kTrials = 1000000;
  OptimizerConfig cfg = base_cfg();
  cfg.dither_mode = DitherMode::kPost;
  cfg.alpha = 1.0;
  RngStream rng(22, 0);
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t t = 0; t < kTrials; ++t) {
    const auto s = dithered_step(state_at({0.0}), {0.3}, cfg, rng);
    const double dx = s.x[0];
    const double d = dx - mean;
    mean += d / static_cast<double>(t + 1);
    m2 += d * (dx - mean);
  }
  const double se = std::sqrt(m2 / (kTrials - 1) / kTrials);
  EXPECT_NEAR(mean, -cfg.delta, 3.0 * se);
}

TEST(Dithered, RecordsScheduleVariance) {
  OptimizerConfig cfg = base_cfg();
  cfg.dither_mode = DitherMode::kPre;
  cfg.alpha = 0.1;
  RngStream rng(1, 0);
  OptimizerState s = state_at({0.0, 0.0});
  s = dithered_step(std::move(s), {1.0, 1.0}, cfg, rng);
  EXPECT_EQ(s.last_sigma_sq, 0.1);
  s = dithered_step(std::move(s), {1.0, 1.0}, cfg, rng);
  EXPECT_EQ(s.last_sigma_sq, 0.1 * std::pow(2.0, -0.55));
}

TEST(LambdaProject, WorkedValues) {
  const ParamVector m{1, -1, 1, -1};
  const ParamVector g = scaled(sign_vec(m), 2.0);
  const double lambda = lambda_project(m, g, 0.1, 1e-12);
  EXPECT_EQ(lambda, 0.1 * 8.0 / (16.0 + 1e-12));
  EXPECT_NEAR(lambda, 0.05, 1e-14);
  EXPECT_EQ(lambda_project({1, -1, 1, -1}, {3, 3, 3, 3}, 0.1, 1e-12), 0.0);
  EXPECT_EQ(lambda_project({1, 1}, {0, 0}, 0.1, 1e-12), 0.0);
  EXPECT_THROW(lambda_project({1}, {1}, 0.1, 0.0), std::invalid_argument);
}

TEST(LambdaProject, ProjectionIdentityProperty) {
  RngStream rng(5, 0);
  for (int t = 0; t < 5000; ++t) {
    const std::size_t d = 1 + t % 9;
    const ParamVector m = sample_gaussian(d, 0.0, 1.0, rng);
    const ParamVector g = sample_gaussian(d, 0.0, std::exp(2.0 * rng.normal()), rng);
    const double delta = 0.001 + rng.uniform();
    const double eps = 1e-12;
    const double lambda = lambda_project(m, g, delta, eps);
    ASSERT_GE(lambda, 0.0);
    const double rhs = delta * std::abs(inner(sign_vec(m), g));
    const double lhs = lambda * (l2_norm_sq(g) + eps);
    ASSERT_LE(std::abs(lhs - rhs), 2.0 * std::numeric_limits<double>::epsilon() * rhs);
  }
}

TEST(Hybrid, NeverSwitchMatchesSignSgdM) {
  OptimizerConfig cfg = base_cfg();
  RngStream noise(3, 0), dither(3, 1);
  OptimizerState a = make_state(ParamVector(4, 1.0), cfg), b = a;
  for (int k = 0; k < 300; ++k) {
    const ParamVector g = sample_gaussian(4, 0.2, 1.0, noise);
    a = hybrid_step(std::move(a), g, cfg, dither);
    b = signsgdm_step(std::move(b), g, cfg);
    ASSERT_EQ(a.x, b.x);
    ASSERT_EQ(a.phase, Phase::kSign);
    ASSERT_GE(a.lambda_ema, 0.0);
    ASSERT_GE(a.last_lambda, 0.0);
  }
}

TEST(Hybrid, ImmediateSwitchMatchesSgd) {
  OptimizerConfig cfg = base_cfg();
  cfg.t_switch = 0;
  cfg.lambda_init = 0.03;
  RngStream noise(3, 0), dither(3, 1);
  OptimizerState a = make_state(ParamVector(4, 1.0), cfg), b = a;
  EXPECT_EQ(a.phase, Phase::kSgd);
  for (int k = 0; k < 100; ++k) {
    const ParamVector g = sample_gaussian(4, 0.2, 1.0, noise);
    a = hybrid_step(std::move(a), g, cfg, dither);
    b = sgd_step(std::move(b), g, 0.03);
    ASSERT_EQ(a.x, b.x);
  }
}

TEST(Hybrid, LambdaEmaFrozenAfterSwitch) {
  OptimizerConfig cfg = base_cfg();
  cfg.t_switch = 20;
  RngStream noise(6, 0), dither(6, 1);
  OptimizerState s = make_state(ParamVector(3, 1.0), cfg);
  double frozen = 0.0;
  for (int k = 0; k < 60; ++k) {
    s = hybrid_step(std::move(s), sample_gaussian(3, 0.5, 1.0, noise), cfg, dither);
    if (k + 1 == 20) frozen = s.lambda_ema;
    if (k + 1 >= 20) {
      ASSERT_EQ(s.lambda_ema, frozen);
      ASSERT_EQ(s.phase, Phase::kSgd);
    }
  }
  EXPECT_GT(frozen, 0.0);
}

TEST(Hybrid, PostSwitchContractionOnQuadratic) {
  // x_{k+1,i} - x*_i = (1 - lambda_bar L_i)(x_{k,i} - x*_i) on a noiseless quadratic
  const ParamVector lip{0.5, 1.0, 2.0};
  const ParamVector opt{0.1, -0.2, 0.3};
  OptimizerConfig cfg = base_cfg();
  cfg.t_switch = 0;
  cfg.lambda_init = 0.4;
  RngStream dither(0, 0);
  OptimizerState s = make_state({1.0, 1.0, 1.0}, cfg);
  ParamVector err = axpy(s.x, -1.0, opt);
  for (int k = 0; k < 50; ++k) {
    ParamVector g(3);
    for (std::size_t i = 0; i < 3; ++i) g[i] = lip[i] * (s.x[i] - opt[i]);
    s = hybrid_step(std::move(s), g, cfg, dither);
    for (std::size_t i = 0; i < 3; ++i) {
      err[i] *= 1.0 - 0.4 * lip[i];
      ASSERT_NEAR(s.x[i] - opt[i], err[i], 1e-14);
    }
  }
  EXPECT_LT(l1_norm(axpy(s.x, -1.0, opt)), 1e-4);
}

TEST(Hybrid, BiasCorrection) {
  OptimizerConfig cfg = base_cfg();
  cfg.t_switch = 10;
  cfg.eta = 0.9;
  OptimizerState s = make_state({0.0}, cfg);
  s.lambda_ema = 0.02;
  EXPECT_EQ(sgd_phase_lr(s, cfg), 0.02);
  cfg.bias_correction = true;
  EXPECT_DOUBLE_EQ(sgd_phase_lr(s, cfg), 0.02 / (1.0 - std::pow(0.9, 10)));
  // a constant lambda sequence is recovered exactly by the correction
  OptimizerState t = make_state({1.0, -1.0}, cfg);
  RngStream dither(0, 0);
  const ParamVector g{2.0, -2.0};
  for (int k = 0; k < 10; ++k) t = hybrid_step(std::move(t), g, cfg, dither);
  EXPECT_NEAR(sgd_phase_lr(t, cfg), lambda_project(sign_vec(g), g, cfg.delta, cfg.epsilon), 1e-15);
}

TEST(Config, Validation) {
  OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.beta = 0.0;
  EXPECT_NO_THROW(cfg.validate());
  cfg.beta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.delta = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Dispatch, NamesRoundTrip) {
  for (auto a : {Algorithm::kSgd, Algorithm::kSgdM, Algorithm::kSignSgd, Algorithm::kSignSgdM, Algorithm::kDithered,
                 Algorithm::kHybrid}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_THROW(parse_algorithm("adam"), std::invalid_argument);
  EXPECT_EQ(parse_dither_mode("post"), DitherMode::kPost);
  EXPECT_EQ(parse_phase("sgd"), Phase::kSgd);
}

TEST(Dispatch, SignSgdMWithZeroBetaIsSignSgd) {
  OptimizerConfig cfg = base_cfg();
  cfg.beta = 0.0;
  RngStream noise(2, 0), dither(2, 1);
  OptimizerState a = make_state(ParamVector(3, 0.0), cfg), b = a;
  for (int k = 0; k < 100; ++k) {
    const ParamVector g = sample_gaussian(3, 0.0, 1.0, noise);
    a = step(Algorithm::kSignSgdM, std::move(a), g, cfg, dither);
    b = step(Algorithm::kSignSgd, std::move(b), g, cfg, dither);
    ASSERT_EQ(a.x, b.x);
  }
}

}  // namespace
}  // namespace signopt
