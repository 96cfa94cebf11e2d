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

#include "signopt/dither.hpp"
#include "signopt/numeric.hpp"
#include "signopt/problems.hpp"
#include "signopt/rng.hpp"

namespace signopt {

/// True gradient g and per-coordinate stochastic-gradient std s. A zero s_i
/// marks a noiseless coordinate (infinite SNR).
struct SnrProfile {
  ParamVector g;
  ParamVector s;

  void validate() const {
    require_same_dim(g, s);
    for (double v : s) {
      if (!(v >= 0.0)) throw std::invalid_argument("SnrProfile: s entries must be >= 0");
    }
  }
};

struct TheoremInputs {
  double l1_lipschitz = 1.0;  // sum_i L_i
  double l1_sigma = 0.0;      // sum_i sigma_i
  double f0 = 0.0;
  double f_star = 0.0;
  std::uint64_t iterations = 1;
  std::uint64_t batch_size = 1;

  void validate() const {
    if (!(l1_lipschitz > 0.0)) throw std::invalid_argument("TheoremInputs: L1 must be > 0");
    if (iterations < 1) throw std::invalid_argument("TheoremInputs: K must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TheoremInputs: n must be >= 1");
    if (!(f0 >= f_star)) throw std::invalid_argument("TheoremInputs: f0 must be >= f*");
  }
};

/// Constant stepsize 1/sqrt(L1 K) under which the rate bounds hold.
inline double theorem_stepsize(double l1_lipschitz, std::uint64_t iterations) {
  return 1.0 / std::sqrt(l1_lipschitz * static_cast<double>(iterations));
}

/// SNR-weighted stationarity: sum_i min(|g_i|, g_i^2 / s_i).
inline double phi_measure(const SnrProfile& p) {
  p.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.g.dim(); ++i) {
    const double a = std::abs(p.g[i]);
    acc += p.s[i] == 0.0 ? a : std::min(a, a * a / p.s[i]);
  }
  return acc;
}

/// Gauss-inequality bound on the sign-failure probability at SNR S. The
/// split point sqrt(2/3) itself falls in the linear branch.
inline double gauss_bound(double snr) {
  if (!(snr >= 0.0)) throw std::invalid_argument("gauss_bound: S must be >= 0");
  static const double split = std::sqrt(2.0 / 3.0);
  if (snr > split) return 2.0 / (9.0 * snr * snr);
  return 0.5 - snr / (2.0 * std::numbers::sqrt3);
}

inline double sign_agreement_lower_bound(double snr) {
  if (!(snr >= 0.0)) throw std::invalid_argument("sign_agreement_lower_bound: S must be >= 0");
  return std::min(1.0, snr) / 3.0;
}

/// 1 - 2 * gauss_bound(S) >= min(1, S) / 3.
inline bool sign_agreement_holds(double snr) {
  return 1.0 - 2.0 * gauss_bound(snr) >= sign_agreement_lower_bound(snr);
}

/// Proven lower bound Phi / 3 on E[g^T sign(g~)].
inline double expected_alignment_bound(const SnrProfile& p) { return phi_measure(p) / 3.0; }

inline double theorem_rhs_phi(const TheoremInputs& t) {
  t.validate();
  return 3.0 * std::sqrt(t.l1_lipschitz) / std::sqrt(static_cast<double>(t.iterations)) *
         (t.f0 - t.f_star + 0.5);
}

inline double theorem_rhs_l1(const TheoremInputs& t) {
  return theorem_rhs_phi(t) + t.l1_sigma / std::sqrt(static_cast<double>(t.batch_size));
}

/// |a| <= min(|a|, a^2 / s) + s for s > 0.
inline bool min_split_check(double a, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("min_split_check: s must be > 0");
  const double abs_a = std::abs(a);
  return abs_a <= std::min(abs_a, a * a / s) + s;
}

struct FailureEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
};

/// Empirical P[sign(S + zeta) != +1] for unit-variance zeta from the family.
/// A zero sample counts as a failure.
inline FailureEstimate mc_sign_failure(NoiseFamily family, double snr, std::uint64_t trials,
                                       RngStream& rng, double bimodal_q = 0.1) {
  if (!(snr >= 0.0)) throw std::invalid_argument("mc_sign_failure: S must be >= 0");
  if (trials < 1) throw std::invalid_argument("mc_sign_failure: trials must be >= 1");
  (void)to_string(family);  // rejects out-of-range enum values
  std::uint64_t failures = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    failures += (snr + sample_unit_noise(family, rng, bimodal_q)) <= 0.0;
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(failures) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

/// Monte Carlo estimate of E[g^T sign(g + s * zeta)].
inline McEstimate mc_alignment(const SnrProfile& p, NoiseFamily family, std::uint64_t trials,
                               RngStream& rng) {
  p.validate();
  if (trials < 2) throw std::invalid_argument("mc_alignment: trials must be >= 2");
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    double value = 0.0;
    for (std::size_t i = 0; i < p.g.dim(); ++i) {
      value += p.g[i] * sign(p.g[i] + p.s[i] * sample_unit_noise(family, rng));
    }
    const double delta = value - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (value - mean);
  }
  const double n = static_cast<double>(trials);
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

/// Exact E[g^T sign(g + s * zeta)] for Gaussian zeta: sum_i |g_i| (2 Phi(S_i) - 1).
inline double gaussian_alignment(const SnrProfile& p) {
  p.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.g.dim(); ++i) {
    acc += p.g[i] * expected_dithered_sign(p.g[i], p.s[i]);
  }
  return acc;
}

}  // namespace signopt
