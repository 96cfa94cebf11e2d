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

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "signopt/dither.hpp"
#include "signopt/numeric.hpp"
#include "signopt/rng.hpp"

namespace signopt {

inline constexpr std::uint64_t kNeverSwitch = std::numeric_limits<std::uint64_t>::max();

enum class DitherMode { kNone, kPre, kPost };

inline std::string_view to_string(DitherMode mode) {
  switch (mode) {
    case DitherMode::kNone: return "none";
    case DitherMode::kPre: return "pre";
    case DitherMode::kPost: return "post";
  }
  throw std::invalid_argument("unknown dither mode");
}

inline DitherMode parse_dither_mode(std::string_view name) {
  if (name == "none") return DitherMode::kNone;
  if (name == "pre") return DitherMode::kPre;
  if (name == "post") return DitherMode::kPost;
  throw std::invalid_argument("unknown dither mode: " + std::string(name));
}

enum class Algorithm { kSgd, kSgdM, kSignSgd, kSignSgdM, kDithered, kHybrid };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSgd: return "sgd";
    case Algorithm::kSgdM: return "sgdm";
    case Algorithm::kSignSgd: return "signsgd";
    case Algorithm::kSignSgdM: return "signsgdm";
    case Algorithm::kDithered: return "dithered";
    case Algorithm::kHybrid: return "hybrid";
  }
  throw std::invalid_argument("unknown algorithm");
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "sgd") return Algorithm::kSgd;
  if (name == "sgdm") return Algorithm::kSgdM;
  if (name == "signsgd") return Algorithm::kSignSgd;
  if (name == "signsgdm") return Algorithm::kSignSgdM;
  if (name == "dithered") return Algorithm::kDithered;
  if (name == "hybrid") return Algorithm::kHybrid;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

struct OptimizerConfig {
  double delta = 0.01;    // sign-step size
  double beta = 0.9;      // momentum EMA weight
  double alpha = 0.0;     // dither scale
  double gamma = 0.55;    // dither annealing exponent
  double eta = 0.99;      // lambda EMA decay
  double epsilon = 1e-12; // projection stabilizer
  std::uint64_t t_switch = kNeverSwitch;  // in optimizer steps
  DitherMode dither_mode = DitherMode::kNone;
  double lr = 0.01;       // SGD / SGD-M learning rate
  double lambda_init = 0.0;
  bool bias_correction = false;

  // beta = 0 is accepted so the SignSGD-M -> SignSGD reduction can be tested.
  void validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("optimizer.delta must be > 0");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("optimizer.beta must lie in [0, 1)");
    if (!(alpha >= 0.0)) throw std::invalid_argument("optimizer.alpha must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("optimizer.gamma must be > 0");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("optimizer.eta must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("optimizer.epsilon must be > 0");
    if (!(lr >= 0.0)) throw std::invalid_argument("optimizer.lr must be >= 0");
    if (!(lambda_init >= 0.0)) throw std::invalid_argument("optimizer.lambda_init must be >= 0");
  }

  DitherSchedule schedule() const { return {alpha, gamma}; }

  bool operator==(const OptimizerConfig&) const = default;
};

enum class Phase { kSign, kSgd };

inline std::string_view to_string(Phase p) { return p == Phase::kSign ? "sign" : "sgd"; }

inline Phase parse_phase(std::string_view name) {
  if (name == "sign") return Phase::kSign;
  if (name == "sgd") return Phase::kSgd;
  throw std::invalid_argument("unknown phase: " + std::string(name));
}

inline Phase phase_at(std::uint64_t k, std::uint64_t t_switch) {
  return k < t_switch ? Phase::kSign : Phase::kSgd;
}

struct OptimizerState {
  ParamVector x;
  ParamVector m;
  std::uint64_t k = 0;
  double lambda_ema = 0.0;
  Phase phase = Phase::kSign;
  // diagnostics of the most recent step
  double last_lambda = 0.0;
  double last_sigma_sq = 0.0;

  bool operator==(const OptimizerState&) const = default;
};

inline OptimizerState make_state(const ParamVector& x0, const OptimizerConfig& cfg) {
  OptimizerState s;
  s.x = x0;
  s.m = ParamVector(x0.dim(), 0.0);
  s.lambda_ema = cfg.lambda_init;
  s.phase = phase_at(0, cfg.t_switch);
  return s;
}

inline OptimizerState sgd_step(OptimizerState s, const ParamVector& grad, double lr) {
  if (!(lr >= 0.0)) throw std::invalid_argument("sgd_step: lr must be >= 0");
  require_same_dim(s.x, grad);
  for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - lr * grad[i];
  s.last_lambda = 0.0;
  s.last_sigma_sq = 0.0;
  ++s.k;
  return s;
}

/// m <- beta m + (1 - beta) g;  x <- x - lr m.
inline OptimizerState sgdm_step(OptimizerState s, const ParamVector& grad, double lr, double beta) {
  require_same_dim(s.m, grad);
  for (std::size_t i = 0; i < s.m.dim(); ++i) s.m[i] = beta * s.m[i] + (1.0 - beta) * grad[i];
  const ParamVector m = s.m;
  return sgd_step(std::move(s), m, lr);
}

inline OptimizerState signsgd_step(OptimizerState s, const ParamVector& grad, const OptimizerConfig& cfg) {
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("signsgd_step: delta must be > 0");
  require_same_dim(s.x, grad);
  for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - cfg.delta * sign(grad[i]);
  s.last_lambda = 0.0;
  s.last_sigma_sq = 0.0;
  ++s.k;
  return s;
}

namespace detail {

inline void update_momentum(OptimizerState& s, const ParamVector& grad, double beta) {
  require_same_dim(s.m, grad);
  for (std::size_t i = 0; i < s.m.dim(); ++i) s.m[i] = beta * s.m[i] + (1.0 - beta) * grad[i];
}

// Sign-phase position update from the already-updated momentum; returns the
// dither variance used at this step.
inline double apply_sign_update(OptimizerState& s, const OptimizerConfig& cfg, RngStream* rng) {
  const double sigma_sq =
      cfg.dither_mode == DitherMode::kNone ? 0.0 : dither_sigma_sq(s.k, cfg.schedule());
  if (cfg.dither_mode == DitherMode::kNone || sigma_sq == 0.0) {
    for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - cfg.delta * sign(s.m[i]);
    return sigma_sq;
  }
  if (!rng) throw std::invalid_argument("dithered update needs an RngStream");
  const ParamVector xi = sample_gaussian(s.x.dim(), 0.0, std::sqrt(sigma_sq), *rng);
  if (cfg.dither_mode == DitherMode::kPre) {
    for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - cfg.delta * sign(s.m[i] + xi[i]);
  } else {
    for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - cfg.delta * (sign(s.m[i]) + xi[i]);
  }
  return sigma_sq;
}

}  // namespace detail

inline OptimizerState signsgdm_step(OptimizerState s, const ParamVector& grad, const OptimizerConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw std::invalid_argument("signsgdm_step: beta out of range");
  detail::update_momentum(s, grad, cfg.beta);
  for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - cfg.delta * sign(s.m[i]);
  s.last_lambda = 0.0;
  s.last_sigma_sq = 0.0;
  ++s.k;
  return s;
}

/// SignSGD-M with Gaussian dither of annealed variance, injected before
/// (pre) or after (post) the sign.
inline OptimizerState dithered_step(OptimizerState s, const ParamVector& grad, const OptimizerConfig& cfg,
                                    RngStream& rng) {
  if (cfg.dither_mode == DitherMode::kNone) {
    throw std::invalid_argument("dithered_step: dither_mode must be pre or post");
  }
  detail::update_momentum(s, grad, cfg.beta);
  s.last_sigma_sq = detail::apply_sign_update(s, cfg, &rng);
  s.last_lambda = 0.0;
  ++s.k;
  return s;
}

/// delta |<sign(m_next), g>| / (||g||^2 + epsilon).
inline double lambda_project(const ParamVector& m_next, const ParamVector& grad, double delta,
                             double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("lambda_project: epsilon must be > 0");
  const double numerator = delta * std::abs(inner(sign_vec(m_next), grad));
  return numerator / (l2_norm_sq(grad) + epsilon);
}

/// Learning rate used after the switch.
inline double sgd_phase_lr(const OptimizerState& s, const OptimizerConfig& cfg) {
  if (!cfg.bias_correction || cfg.t_switch == 0 || cfg.t_switch == kNeverSwitch) return s.lambda_ema;
  return s.lambda_ema / (1.0 - std::pow(cfg.eta, static_cast<double>(cfg.t_switch)));
}

/// SignSGD-M (optionally dithered) while k < t_switch, tracking an EMA of the
/// projection-calibrated learning rate; afterwards plain SGD with that EMA
/// frozen. The projection uses the un-dithered momentum and the same
/// gradient sample as the momentum update.
inline OptimizerState hybrid_step(OptimizerState s, const ParamVector& grad, const OptimizerConfig& cfg,
                                  RngStream& rng) {
  require_same_dim(s.x, grad);
  if (s.k < cfg.t_switch) {
    detail::update_momentum(s, grad, cfg.beta);
    const double lambda = lambda_project(s.m, grad, cfg.delta, cfg.epsilon);
    s.lambda_ema = cfg.eta * s.lambda_ema + (1.0 - cfg.eta) * lambda;
    s.last_sigma_sq = detail::apply_sign_update(s, cfg, &rng);
    s.last_lambda = lambda;
  } else {
    const double lr = sgd_phase_lr(s, cfg);
    for (std::size_t i = 0; i < s.x.dim(); ++i) s.x[i] = s.x[i] - lr * grad[i];
    s.last_lambda = 0.0;
    s.last_sigma_sq = 0.0;
  }
  ++s.k;
  s.phase = phase_at(s.k, cfg.t_switch);
  return s;
}

/// Phase a non-hybrid algorithm runs in.
inline Phase algorithm_phase(Algorithm a, std::uint64_t k, std::uint64_t t_switch) {
  switch (a) {
    case Algorithm::kSgd:
    case Algorithm::kSgdM:
      return Phase::kSgd;
    case Algorithm::kHybrid:
      return phase_at(k, t_switch);
    default:
      return Phase::kSign;
  }
}

/// One step of any algorithm; `dither` is only consumed by dithered and
/// (when configured) hybrid updates.
inline OptimizerState step(Algorithm a, OptimizerState s, const ParamVector& grad,
                           const OptimizerConfig& cfg, RngStream& dither) {
  switch (a) {
    case Algorithm::kSgd:
      s = sgd_step(std::move(s), grad, cfg.lr);
      break;
    case Algorithm::kSgdM:
      s = sgdm_step(std::move(s), grad, cfg.lr, cfg.beta);
      break;
    case Algorithm::kSignSgd:
      s = signsgd_step(std::move(s), grad, cfg);
      break;
    case Algorithm::kSignSgdM:
      s = signsgdm_step(std::move(s), grad, cfg);
      break;
    case Algorithm::kDithered:
      s = dithered_step(std::move(s), grad, cfg, dither);
      break;
    case Algorithm::kHybrid:
      return hybrid_step(std::move(s), grad, cfg, dither);
  }
  s.phase = algorithm_phase(a, s.k, cfg.t_switch);
  return s;
}

}  // namespace signopt
