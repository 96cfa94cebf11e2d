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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "signopt/harness/config.hpp"
#include "signopt/numeric.hpp"
#include "signopt/optimizers.hpp"
#include "signopt/problems.hpp"
#include "signopt/rng.hpp"
#include "signopt/theory.hpp"

namespace signopt::harness {

/// One recorded step. Metrics use the true gradient at x_k and the known
/// per-coordinate std sigma_i / sqrt(n); lambda, lambda_ema and the dither
/// variance are those of the update taken at step k.
struct RecordRow {
  std::uint64_t k = 0;
  double f = 0.0;
  double l1_grad = 0.0;
  double phi = 0.0;
  double lambda = 0.0;
  double lambda_ema = 0.0;
  double sigma_dither_sq = 0.0;
  Phase phase = Phase::kSign;

  bool operator==(const RecordRow&) const = default;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::uint64_t steps_requested = 0;
  std::uint64_t steps_completed = 0;
  std::uint64_t oracle_calls = 0;
  bool diverged = false;
  double delta_used = 0.0;
  double f0 = 0.0;
  double final_f = 0.0;
  // running averages over every step, not just recorded rows
  double mean_phi = 0.0;
  double mean_l1_grad = 0.0;
  double lambda_at_switch = 0.0;
  double wall_time_s = 0.0;

  // wall time is excluded: it is the only non-deterministic field
  bool operator==(const RunSummary& o) const {
    return seed == o.seed && steps_requested == o.steps_requested && steps_completed == o.steps_completed &&
           oracle_calls == o.oracle_calls && diverged == o.diverged && delta_used == o.delta_used &&
           f0 == o.f0 && final_f == o.final_f && mean_phi == o.mean_phi && mean_l1_grad == o.mean_l1_grad &&
           lambda_at_switch == o.lambda_at_switch;
  }
};

struct RunRecord {
  std::vector<RecordRow> rows;
  RunSummary summary;
  std::vector<ParamVector> iterates;  // x_k per recorded row, when requested

  bool operator==(const RunRecord& o) const {
    return rows == o.rows && summary == o.summary && iterates == o.iterates;
  }
};

struct RunOptions {
  bool keep_iterates = false;
  // multiplies every stochastic gradient before the optimizer sees it
  double grad_scale = 1.0;
};

inline std::uint64_t default_record_stride(std::uint64_t steps) {
  constexpr std::uint64_t kMaxRows = 10000;
  return steps <= kMaxRows ? 1 : (steps + kMaxRows - 1) / kMaxRows;
}

/// Step size multiplier of the step-decay schedule at step k.
inline double decay_multiplier(const RunSpec& run, std::uint64_t k) {
  if (run.lr_decay_every == 0 || run.lr_decay_factor == 1.0) return 1.0;
  return std::pow(run.lr_decay_factor, static_cast<double>(k / run.lr_decay_every));
}

/// Runs cfg.run.steps optimizer steps on a prebuilt problem. Deterministic
/// in (cfg, seed): oracle noise and dither draw from separate streams
/// derived from the seed.
inline RunRecord run_single(const ExperimentConfig& cfg, const Problem& problem, std::uint64_t seed,
                            const RunOptions& options = {}) {
  OptimizerConfig opt = cfg.optimizer;
  const std::uint64_t steps = cfg.run.steps;
  if (steps < 1) throw ConfigError("run.steps must be >= 1");
  if (cfg.run.batch_size < 1) throw ConfigError("run.batch_size must be >= 1");
  if (cfg.run.theorem_mode) opt.delta = theorem_stepsize(problem.l1_lipschitz(), steps);
  try {
    opt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.algorithm == Algorithm::kDithered && opt.dither_mode == DitherMode::kNone) {
    throw ConfigError("dithered algorithm needs optimizer.dither_mode = pre or post");
  }

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = cfg.run.batch_size;
  const std::uint64_t stride = cfg.run.record_stride ? cfg.run.record_stride : default_record_stride(steps);
  const RngStream base(seed, 0);
  RngStream oracle = base.derive(StreamTag::kOracle);
  RngStream dither = base.derive(StreamTag::kDither);

  SnrProfile profile;
  profile.s = ParamVector(problem.dim);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < problem.dim; ++i) profile.s[i] = problem.noise.sigma[i] / root_n;

  RunRecord record;
  auto& summary = record.summary;
  summary.seed = seed;
  summary.steps_requested = steps;
  summary.delta_used = opt.delta;

  OptimizerState state = make_state(problem.x0, opt);
  state.phase = algorithm_phase(cfg.algorithm, 0, opt.t_switch);
  double phi_sum = 0.0, l1_sum = 0.0;

  for (std::uint64_t k = 0; k < steps; ++k) {
    const double f = problem.eval_f(state.x);
    if (k == 0) summary.f0 = f;
    if (!std::isfinite(f) || !state.x.all_finite()) {
      summary.diverged = true;
      summary.final_f = f;
      break;
    }
    profile.g = problem.eval_grad(state.x);
    const double l1 = l1_norm(profile.g);
    const double phi = phi_measure(profile);
    phi_sum += phi;
    l1_sum += l1;

    GradSample sample = stochastic_grad_from(problem, profile.g, n, oracle);
    ++summary.oracle_calls;
    if (options.grad_scale != 1.0) sample.grad = scaled(sample.grad, options.grad_scale);

    OptimizerConfig step_cfg = opt;
    if (const double mult = decay_multiplier(cfg.run, k); mult != 1.0) {
      step_cfg.delta *= mult;
      step_cfg.lr *= mult;
    }
    const Phase phase = algorithm_phase(cfg.algorithm, k, opt.t_switch);
    if (options.keep_iterates && k % stride == 0) record.iterates.push_back(state.x);
    state = step(cfg.algorithm, std::move(state), sample.grad, step_cfg, dither);
    ++summary.steps_completed;
    if (cfg.algorithm == Algorithm::kHybrid && k + 1 == opt.t_switch) summary.lambda_at_switch = state.lambda_ema;

    if (k % stride == 0) {
      record.rows.push_back({k, f, l1, phi, state.last_lambda, state.lambda_ema, state.last_sigma_sq, phase});
    }
  }

  if (!summary.diverged) {
    summary.final_f = problem.eval_f(state.x);
    summary.diverged = !std::isfinite(summary.final_f);
  }
  if (summary.steps_completed > 0) {
    summary.mean_phi = phi_sum / static_cast<double>(summary.steps_completed);
    summary.mean_l1_grad = l1_sum / static_cast<double>(summary.steps_completed);
  }
  summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

inline RunRecord run_single(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& options = {}) {
  return run_single(cfg, build_problem(cfg.problem), seed, options);
}

}  // namespace signopt::harness
