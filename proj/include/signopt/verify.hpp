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

// Verification suites: every check below runs a pinned experiment and
// reports pass/fail with the numbers it compared. The CLI's `selftest`,
// `bound-verify` and `dither-verify` commands and the acceptance test binary
// all call into this header.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "signopt/dither.hpp"
#include "signopt/harness/config.hpp"
#include "signopt/harness/io.hpp"
#include "signopt/harness/run.hpp"
#include "signopt/harness/suites.hpp"
#include "signopt/numeric.hpp"
#include "signopt/optimizers.hpp"
#include "signopt/problems.hpp"
#include "signopt/rng.hpp"
#include "signopt/theory.hpp"

namespace signopt::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

/// Distance in representable doubles between two finite values.
inline std::uint64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  auto key = [](double v) {
    const auto bits = std::bit_cast<std::int64_t>(v);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const std::int64_t ka = key(a), kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka - kb) : static_cast<std::uint64_t>(kb - ka);
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::uint64_t i = 0; i < count; ++i) seeds[i] = i;
  return seeds;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Pinned experiment configurations

/// d = 10 quadratic, L_i spread over [0.5, 4], Gaussian sigma_i = 1, x0 = 1.
inline constexpr const char* kTheoremConfig = R"(# rate-bound verification problem
problem.kind = quadratic
problem.dim = 10
problem.lipschitz = 0.5,0.8,1.1,1.5,1.9,2.3,2.7,3.1,3.5,4
problem.x0 = 1
problem.noise.family = gaussian
problem.noise.sigma = 1
optimizer.algorithm = signsgd
run.theorem_mode = true
)";

/// Same quadratic for the switching experiment; delta is large enough that
/// the sign phase stalls in a visible band.
inline constexpr const char* kSwitchConfig = R"(# switching experiment
problem.kind = quadratic
problem.dim = 10
problem.lipschitz = 0.5,0.8,1.1,1.5,1.9,2.3,2.7,3.1,3.5,4
problem.x0 = 1
problem.noise.family = gaussian
problem.noise.sigma = 1
optimizer.algorithm = hybrid
optimizer.delta = 0.01
optimizer.beta = 0.9
optimizer.eta = 0.99
optimizer.lr = 0.05
run.steps = 5000
run.batch_size = 1
)";

inline const std::vector<std::uint64_t> kTheoremK{100, 1000, 10000};
inline const std::vector<std::uint64_t> kTheoremN{1, 4, 16};
inline const std::vector<std::uint64_t> kSwitchGrid{100, 250, 500, 1000, 2000, 5000};
inline const std::vector<double> kSnrGrid{0.1, 0.25, 0.5, std::sqrt(2.0 / 3.0), 1.0, 2.0, 5.0};

inline harness::ExperimentConfig theorem_config() { return harness::parse_config(kTheoremConfig); }
inline harness::ExperimentConfig switch_config() { return harness::parse_config(kSwitchConfig); }

// ----------------------------------------------------------------------------
// Individual criteria

/// p_hat <= gauss_bound(S) + 3 SE for the symmetric unimodal families.
inline CheckResult check_gauss_bound_validity(std::uint64_t trials = 1000000, std::uint64_t seed = 2026) {
  CheckResult r{1, "Gauss-bound validity", true, {}};
  const NoiseFamily families[] = {NoiseFamily::kGaussian, NoiseFamily::kUniform, NoiseFamily::kLaplace};
  double worst = -1.0;
  std::string worst_cell;
  std::uint64_t stream = 0;
  for (NoiseFamily fam : families) {
    for (double s : kSnrGrid) {
      RngStream rng = RngStream(seed, ++stream).derive(StreamTag::kMonteCarlo);
      const auto est = mc_sign_failure(fam, s, trials, rng);
      const double excess = est.p_hat - (gauss_bound(s) + 3.0 * est.std_err);
      if (excess > 0.0) r.passed = false;
      if (excess > worst || worst_cell.empty()) {
        worst = excess;
        worst_cell = detail::fmt("%s S=%.4f p=%.5f bound=%.5f se=%.2e", std::string(to_string(fam)).c_str(), s,
                                 est.p_hat, gauss_bound(s), est.std_err);
      }
    }
  }
  r.detail = "21 cells, tightest: " + worst_cell;
  return r;
}

/// 1 - 2 gauss_bound(S) >= min(1, S)/3 with zero tolerance.
inline CheckResult check_sign_agreement_grid() {
  CheckResult r{2, "Gauss-bound relaxation grid", true, {}};
  std::vector<double> grid;
  for (int j = 1; j <= 10000; ++j) grid.push_back(0.001 * j);
  const double split = std::sqrt(2.0 / 3.0);
  grid.push_back(split);
  grid.push_back(std::nextafter(split, 0.0));
  grid.push_back(std::nextafter(split, 10.0));
  grid.push_back(split - 1e-9);
  grid.push_back(split + 1e-9);
  std::size_t failures = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (double s : grid) {
    const double slack = (1.0 - 2.0 * gauss_bound(s)) - sign_agreement_lower_bound(s);
    min_slack = std::min(min_slack, slack);
    if (!sign_agreement_holds(s)) ++failures;
  }
  r.passed = failures == 0;
  r.detail = detail::fmt("%zu points over (0, 10], failures=%zu, min slack=%.3e", grid.size(), failures, min_slack);
  return r;
}

struct TheoremResults {
  harness::TheoremReport noisy;
  harness::TheoremReport noiseless;
};

inline TheoremResults run_theorem_experiments(unsigned threads = 0) {
  TheoremResults out;
  auto cfg = theorem_config();
  out.noisy = harness::run_theorem_suite(cfg, detail::seed_range(20), kTheoremK, kTheoremN, threads);
  cfg.problem.noise_sigma = ParamVector{0.0};
  out.noiseless = harness::run_theorem_suite(cfg, {0}, kTheoremK, {1}, threads);
  return out;
}

inline CheckResult check_theorem_phi(const TheoremResults& t) {
  CheckResult r{3, "Rate bound on the SNR-weighted measure", true, {}};
  double worst_ratio = 0.0;
  for (const auto& c : t.noisy.cells) {
    r.passed = r.passed && c.pass_phi();
    worst_ratio = std::max(worst_ratio, c.mean_phi / c.rhs_phi);
  }
  r.passed = r.passed && t.noisy.cells.size() == 9;
  r.detail = detail::fmt("%zu cells, max mean_phi/rhs = %.4f", t.noisy.cells.size(), worst_ratio);
  return r;
}

inline CheckResult check_theorem_l1(const TheoremResults& t) {
  CheckResult r{4, "Rate bound on the l1 gradient norm + decay exponent", true, {}};
  double worst_ratio = 0.0;
  for (const auto& c : t.noisy.cells) {
    r.passed = r.passed && c.pass_l1();
    worst_ratio = std::max(worst_ratio, c.mean_l1 / c.rhs_l1);
  }
  r.passed = r.passed && t.noisy.cells.size() == 9;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  if (!t.noiseless.phi_decay_exponents.empty()) exponent = t.noiseless.phi_decay_exponents.front().second;
  const bool decay_ok = exponent >= 0.4 && exponent <= 0.6;
  r.passed = r.passed && decay_ok;
  r.detail = detail::fmt("max mean_l1/rhs = %.4f, noiseless decay exponent = %.4f", worst_ratio, exponent);
  return r;
}

/// MC mean of sign(m + xi) within 4 SE of 2 Phi(m/sigma) - 1, plus the
/// first-order value at m/sigma = 0.01 within 0.1%.
inline CheckResult check_dither_statistics(std::uint64_t trials = 1000000, std::uint64_t seed = 7) {
  CheckResult r{5, "Dithered-sign statistics", true, {}};
  const double ratios[] = {0.0, 0.1, -0.1, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0};
  double worst_z = 0.0;
  std::uint64_t stream = 0;
  for (double ratio : ratios) {
    RngStream rng = RngStream(seed, ++stream).derive(StreamTag::kMonteCarlo);
    const auto est = mc_dithered_sign(ratio, 1.0, trials, rng);
    const double z = std::abs(est.mean - expected_dithered_sign(ratio, 1.0)) / est.std_err;
    worst_z = std::max(worst_z, z);
    if (!(z <= 4.0)) r.passed = false;
  }
  const double analytic = expected_dithered_sign(0.01, 1.0);
  const double rel = std::abs(dithered_sign_first_order(0.01, 1.0) - analytic) / analytic;
  r.passed = r.passed && rel <= 1e-3;
  r.detail = detail::fmt("9 grid points, max |z| = %.3f; first-order rel. error at 0.01 = %.3e", worst_z, rel);
  return r;
}

inline CheckResult check_projection_calibration(std::uint64_t samples = 10000, std::uint64_t seed = 11) {
  CheckResult r{6, "Projection calibration", true, {}};
  RngStream rng = RngStream(seed, 0).derive(StreamTag::kMonteCarlo);
  const double eps = 1e-12;
  std::uint64_t max_ulps = 0;
  std::size_t negatives = 0;
  for (std::uint64_t t = 0; t < samples; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.next_u64() % 32);
    const double scale = std::pow(10.0, 6.0 * rng.uniform() - 3.0);
    const double delta = std::pow(10.0, 4.0 * rng.uniform() - 4.0);
    ParamVector m = sample_gaussian(d, 0.0, 1.0, rng);
    ParamVector g = sample_gaussian(d, 0.0, scale, rng);
    const double lambda = lambda_project(m, g, delta, eps);
    if (!(lambda >= 0.0)) ++negatives;
    const double rhs = delta * std::abs(inner(sign_vec(m), g));
    max_ulps = std::max(max_ulps, detail::ulp_distance(lambda * (l2_norm_sq(g) + eps), rhs));
  }
  // orthogonal inputs: sign(m) = (1, -1, 1, -1), g = (a, a, b, b); the
  // running sum is a, 0, b, 0 with no rounding
  bool zero_ok = true;
  for (int t = 0; t < 100; ++t) {
    const double a = rng.normal(), b = rng.normal();
    zero_ok = zero_ok && lambda_project({1.0, -2.0, 3.0, -0.5}, {a, a, b, b}, 0.1, eps) == 0.0;
  }
  zero_ok = zero_ok && lambda_project({1.0, -1.0}, {0.0, 0.0}, 0.1, eps) == 0.0;
  // worked value: g = 2 sign(m), d = 4, delta = 0.1
  const ParamVector m{0.3, -1.2, 5.0, -0.01};
  const ParamVector g = scaled(sign_vec(m), 2.0);
  const double worked = lambda_project(m, g, 0.1, eps);
  const double hand = 0.1 * 8.0 / (16.0 + eps);
  // epsilon moves the value by 0.05 * eps / 16 ~ 3e-15 off 0.05
  const bool worked_ok = worked == hand && std::abs(worked - 0.05) <= 1e-14;
  r.passed = negatives == 0 && max_ulps <= 2 && zero_ok && worked_ok;
  r.detail = detail::fmt("%llu triples, negatives=%zu, max ulps=%llu, zero-inner ok=%d, worked lambda=%.17g",
                         static_cast<unsigned long long>(samples), negatives,
                         static_cast<unsigned long long>(max_ulps), zero_ok, worked);
  return r;
}

namespace detail {

inline harness::ExperimentConfig reduction_base() {
  auto cfg = switch_config();
  cfg.run.steps = 600;
  return cfg;
}

inline harness::RunRecord traced(harness::ExperimentConfig cfg, Algorithm a, std::uint64_t seed = 3) {
  cfg.algorithm = a;
  harness::RunOptions opts;
  opts.keep_iterates = true;
  return harness::run_single(cfg, seed, opts);
}

inline bool same_trajectory(const harness::RunRecord& a, const harness::RunRecord& b) {
  if (a.iterates != b.iterates || a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].f != b.rows[i].f || a.rows[i].phi != b.rows[i].phi) return false;
  }
  return a.summary.final_f == b.summary.final_f;
}

}  // namespace detail

inline CheckResult check_reduction_identities() {
  CheckResult r{7, "Reduction identities", true, {}};
  const auto base = detail::reduction_base();
  const auto signm = detail::traced(base, Algorithm::kSignSgdM);

  auto pre = base;
  pre.optimizer.alpha = 0.0;
  pre.optimizer.dither_mode = DitherMode::kPre;
  auto post = pre;
  post.optimizer.dither_mode = DitherMode::kPost;
  const auto pre_run = detail::traced(pre, Algorithm::kDithered);
  const auto post_run = detail::traced(post, Algorithm::kDithered);
  const bool dither_ok = pre_run == signm && post_run == signm;
  const bool pre_post_ok = pre_run == post_run;

  auto never = base;
  never.optimizer.t_switch = base.run.steps;
  const bool hybrid_never_ok = detail::same_trajectory(detail::traced(never, Algorithm::kHybrid), signm);

  auto immediate = base;
  immediate.optimizer.t_switch = 0;
  immediate.optimizer.lambda_init = base.optimizer.lr;
  const bool hybrid_immediate_ok =
      detail::same_trajectory(detail::traced(immediate, Algorithm::kHybrid), detail::traced(base, Algorithm::kSgd));

  auto zero_beta = base;
  zero_beta.optimizer.beta = 0.0;
  const bool beta_ok =
      detail::traced(zero_beta, Algorithm::kSignSgdM) == detail::traced(zero_beta, Algorithm::kSignSgd);

  r.passed = dither_ok && pre_post_ok && hybrid_never_ok && hybrid_immediate_ok && beta_ok;
  r.detail = detail::fmt("dithered(a=0)==signsgdm:%d pre==post:%d hybrid(T>=K)==signsgdm:%d "
                         "hybrid(T=0)==sgd:%d signsgdm(b=0)==signsgd:%d",
                         dither_ok, pre_post_ok, hybrid_never_ok, hybrid_immediate_ok, beta_ok);
  return r;
}

/// Each coordinate of x_{k+1} is one of fl(x_k - delta), x_k, fl(x_k + delta).
inline bool sign_steps_only(const std::vector<ParamVector>& xs, double delta) {
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    for (std::size_t i = 0; i < xs[k].dim(); ++i) {
      const double before = xs[k][i], after = xs[k + 1][i];
      if (after != before - delta && after != before && after != before + delta) return false;
    }
  }
  return true;
}

inline CheckResult check_sign_geometry_and_scale() {
  CheckResult r{8, "Sign-phase geometry and scale invariance", true, {}};
  auto base = detail::reduction_base();
  const double delta = base.optimizer.delta;

  bool geometry = sign_steps_only(detail::traced(base, Algorithm::kSignSgdM).iterates, delta) &&
                  sign_steps_only(detail::traced(base, Algorithm::kSignSgd).iterates, delta);
  auto pre = base;
  pre.optimizer.alpha = 0.1;
  pre.optimizer.dither_mode = DitherMode::kPre;
  geometry = geometry && sign_steps_only(detail::traced(pre, Algorithm::kDithered).iterates, delta);
  auto hyb = base;
  hyb.optimizer.t_switch = kNeverSwitch;
  geometry = geometry && sign_steps_only(detail::traced(hyb, Algorithm::kHybrid).iterates, delta);

  // Scale test. epsilon only stabilizes a zero gradient; it is taken
  // negligible here so that lambda is exactly homogeneous of degree -1.
  hyb.algorithm = Algorithm::kHybrid;
  hyb.optimizer.epsilon = 1e-300;
  harness::RunOptions unit, tenfold;
  unit.keep_iterates = tenfold.keep_iterates = true;
  tenfold.grad_scale = 10.0;
  const auto a = harness::run_single(hyb, 3, unit);
  const auto b = harness::run_single(hyb, 3, tenfold);
  const bool iterates_equal = a.iterates == b.iterates && a.summary.final_f == b.summary.final_f;
  std::uint64_t max_ulps = 0, worst_k = 0;
  std::size_t beyond = 0;
  for (std::size_t k = 0; k < std::min(a.rows.size(), b.rows.size()); ++k) {
    const std::uint64_t d = detail::ulp_distance(b.rows[k].lambda, a.rows[k].lambda / 10.0);
    beyond += d > 4;
    if (d > max_ulps) {
      max_ulps = d;
      worst_k = k;
    }
  }
  r.passed = geometry && iterates_equal && max_ulps <= 4 && a.rows.size() == b.rows.size();
  // fl(10 g_i) is itself rounded; when <sign(m), g> nearly cancels, that
  // input rounding is amplified and no evaluation order can hide it
  r.detail = detail::fmt("step geometry ok=%d, iterates bitwise equal under c=10: %d, max lambda ulps=%llu "
                         "at k=%llu (lambda=%.3e), %zu/%zu steps beyond 4 ulps",
                         geometry, iterates_equal, static_cast<unsigned long long>(max_ulps),
                         static_cast<unsigned long long>(worst_k), a.rows.empty() ? 0.0 : a.rows[worst_k].lambda,
                         beyond, a.rows.size());
  return r;
}

struct SwitchResults {
  harness::SwitchReport noisy;
  harness::RunRecord noiseless_signsgdm;
};

inline SwitchResults run_switch_experiments(unsigned threads = 0) {
  SwitchResults out;
  const auto cfg = switch_config();
  out.noisy = harness::run_switch_suite(cfg, kSwitchGrid, detail::seed_range(20), threads);
  auto clean = cfg;
  clean.algorithm = Algorithm::kSignSgdM;
  clean.problem.noise_sigma = ParamVector{0.0};
  clean.run.record_stride = 1;
  out.noiseless_signsgdm = harness::run_single(clean, 0);
  return out;
}

/// Lower edge of the noiseless sign limit cycle: when every coordinate moves
/// by exactly +/-delta, e^2 + (e - delta)^2 >= delta^2 / 2 per coordinate, so
/// the average loss of two consecutive iterates is at least L1 delta^2 / 8.
inline double limit_cycle_floor(const Problem& p, double delta) {
  return p.l1_lipschitz() * delta * delta / 8.0;
}

inline CheckResult check_switching_benefit(const SwitchResults& s) {
  CheckResult r{9, "Switching escapes the sign limit cycle", true, {}};
  const auto& best = s.noisy.best_hybrid();
  const double sign_med = s.noisy.signsgdm.median_final_f();
  const bool benefit = best.median_final_f() < sign_med;

  bool positive_lambda = true;
  for (const auto& row : s.noisy.hybrid) {
    for (double l : row.lambda_at_switch) positive_lambda = positive_lambda && l > 0.0;
  }

  const auto cfg = switch_config();
  const Problem clean = harness::build_problem(cfg.problem);
  const double floor = limit_cycle_floor(clean, cfg.optimizer.delta);
  const auto& rows = s.noiseless_signsgdm.rows;
  const std::size_t tail_start = rows.size() - rows.size() / 10;
  double min_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = tail_start; k + 1 < rows.size(); ++k) {
    min_pair = std::min(min_pair, 0.5 * (rows[k].f + rows[k + 1].f));
  }
  // 1e-9 relative slack covers rounding in x - delta
  const bool band = rows.size() >= 20 && min_pair >= floor * (1.0 - 1e-9);

  r.passed = benefit && band && positive_lambda;
  r.detail = detail::fmt("best T_switch=%llu median f=%.4e vs signsgdm %.4e; noiseless tail min pair-avg f=%.4e "
                         ">= floor %.4e: %d; lambda_at_switch>0: %d",
                         static_cast<unsigned long long>(best.t_switch), best.median_final_f(), sign_med, min_pair,
                         floor, band, positive_lambda);
  return r;
}

/// 1-D quadratic (L = 1, x* = 0) started at x0 = -0.25 with sigma = 1, so
/// the starting SNR is the 0.25 grid cell.
inline harness::ExperimentConfig asymmetric_config() {
  harness::ExperimentConfig cfg;
  cfg.problem.kind = "quadratic";
  cfg.problem.dim = 1;
  cfg.problem.lipschitz = ParamVector{1.0};
  cfg.problem.x0 = ParamVector{-0.25};
  cfg.problem.noise_family = NoiseFamily::kAsymmetricBimodal;
  cfg.problem.noise_sigma = ParamVector{1.0};
  cfg.problem.bimodal_q = 0.1;
  cfg.optimizer.delta = 1e-3;
  cfg.run.steps = 10000;
  cfg.run.batch_size = 1;
  return cfg;
}

inline CheckResult check_assumption_violation(std::uint64_t trials = 1000000, std::uint64_t seed = 13,
                                              unsigned threads = 0) {
  CheckResult r{10, "Asymmetric noise breaks the sign bound", true, {}};
  double best_excess_se = -std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  std::uint64_t stream = 0;
  for (double s : kSnrGrid) {
    RngStream rng = RngStream(seed, ++stream).derive(StreamTag::kMonteCarlo);
    const auto est = mc_sign_failure(NoiseFamily::kAsymmetricBimodal, s, trials, rng);
    const double se = std::max(est.std_err, 1e-300);
    const double excess = (est.p_hat - gauss_bound(s)) / se;
    if (excess > best_excess_se) {
      best_excess_se = excess;
      best_s = s;
    }
  }
  const bool violated = best_excess_se > 3.0;

  const auto seeds = detail::seed_range(20);
  auto cfg = asymmetric_config();
  const Problem problem = harness::build_problem(cfg.problem);
  const double f0 = problem.eval_f(problem.x0);
  auto median_final = [&](const harness::ExperimentConfig& c) {
    const auto runs = harness::parallel_map<double>(
        seeds.size(), [&](std::size_t i) { return harness::run_single(c, problem, seeds[i]).summary.final_f; },
        threads);
    return harness::median(runs);
  };
  cfg.algorithm = Algorithm::kSignSgd;
  const double sign_f = median_final(cfg);
  cfg.algorithm = Algorithm::kSgd;
  double best_sgd = std::numeric_limits<double>::infinity();
  double best_lr = 0.0;
  for (double lr : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
    cfg.optimizer.lr = lr;
    const double f = median_final(cfg);
    if (f < best_sgd) {
      best_sgd = f;
      best_lr = lr;
    }
  }
  const bool sign_fails = sign_f >= 0.5 * f0;
  const bool sgd_ok = best_sgd < 0.01 * f0;
  r.passed = violated && sign_fails && sgd_ok;
  r.detail = detail::fmt("max excess %.1f SE at S=%.3f; 1-D quadratic f0=%.4e: signsgd median f=%.4e "
                         "(%.1f%% of f0), sgd(lr=%.0e) median f=%.4e (%.3f%% of f0)",
                         best_excess_se, best_s, f0, sign_f, 100.0 * sign_f / f0, best_lr, best_sgd,
                         100.0 * best_sgd / f0);
  return r;
}

/// ||g - g_fd||_inf / ||g_fd||_inf with central differences of step h.
inline double fd_relative_error(const Problem& p, const ParamVector& x, double h) {
  const ParamVector g = p.eval_grad(x);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    ParamVector plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (p.eval_f(plus) - p.eval_f(minus)) / (2.0 * h);
    err = std::max(err, std::abs(g[i] - fd));
    scale = std::max(scale, std::abs(fd));
  }
  return err / scale;
}

inline CheckResult check_gradient_correctness(std::uint64_t seed = 17) {
  CheckResult r{11, "Gradient correctness (logistic, MLP)", true, {}};
  const auto logistic = make_logistic(5, 6, 40, NoiseSpec{NoiseFamily::kGaussian, ParamVector(6, 0.0)});
  const std::vector<std::size_t> widths{3, 5, 4, 1};
  const std::size_t mlp_dim = MlpLayout{widths}.num_params();
  const auto mlp = make_mlp(9, widths, NoiseSpec{NoiseFamily::kGaussian, ParamVector(mlp_dim, 0.0)}, 32);
  RngStream rng = RngStream(seed, 0).derive(StreamTag::kMonteCarlo);
  double worst_logistic = 0.0, worst_mlp = 0.0;
  for (int t = 0; t < 100; ++t) {
    worst_logistic = std::max(worst_logistic, fd_relative_error(logistic, sample_gaussian(6, 0.0, 1.0, rng), 1e-5));
    worst_mlp = std::max(worst_mlp, fd_relative_error(mlp, sample_gaussian(mlp_dim, 0.0, 1.0, rng), 1e-5));
  }
  r.passed = worst_logistic < 1e-6 && worst_mlp < 1e-4;
  r.detail = detail::fmt("100 points each: logistic max rel. err %.2e (< 1e-6), mlp max rel. err %.2e (< 1e-4)",
                         worst_logistic, worst_mlp);
  return r;
}

inline CheckResult check_serialization() {
  CheckResult r{12, "Config and CSV round-trips", true, {}};
  bool config_ok = true;
  for (const char* text : {kTheoremConfig, kSwitchConfig}) {
    const auto cfg = harness::parse_config(text);
    const std::string canonical = harness::serialize_config(cfg);
    config_ok = config_ok && harness::parse_config(canonical) == cfg &&
                harness::serialize_config(harness::parse_config(canonical)) == canonical;
  }
  // awkward values: non-terminating binary fractions, extremes, infinity
  auto odd = switch_config();
  odd.optimizer.delta = 0.1 + 0.2;
  odd.optimizer.epsilon = std::numeric_limits<double>::denorm_min();
  odd.optimizer.lr = std::numeric_limits<double>::max();
  odd.optimizer.t_switch = kNeverSwitch;
  odd.problem.x_opt = ParamVector{1.0 / 3.0, -2.0 / 7.0, 1e-310, 6.02214076e23};
  odd.problem.dim = 4;
  odd.problem.lipschitz = ParamVector{1.0 / 3.0};
  odd.run.seeds = {1, 18446744073709551615ULL};
  odd.optimizer.dither_mode = DitherMode::kPost;
  const std::string odd_text = harness::serialize_config(odd);
  config_ok = config_ok && harness::parse_config(odd_text) == odd &&
              harness::serialize_config(harness::parse_config(odd_text)) == odd_text;

  auto cfg = switch_config();
  cfg.run.steps = 300;
  cfg.optimizer.t_switch = 150;
  cfg.optimizer.dither_mode = DitherMode::kPre;
  cfg.optimizer.alpha = 0.05;
  const auto record = harness::run_single(cfg, 5);
  std::stringstream buf;
  harness::write_csv(record, buf);
  const std::string first = buf.str();
  const auto rows = harness::read_csv(buf);
  harness::RunRecord again;
  again.rows = rows;
  std::stringstream buf2;
  harness::write_csv(again, buf2);
  const bool header_ok = first.substr(0, first.find('\n')) == harness::kCsvHeader;
  const bool csv_ok = rows == record.rows && buf2.str() == first;

  r.passed = config_ok && csv_ok && header_ok;
  r.detail = detail::fmt("config round-trip=%d, csv round-trip=%d (%zu rows), header=%d", config_ok, csv_ok,
                         rows.size(), header_ok);
  return r;
}

// ----------------------------------------------------------------------------
// Suites

inline std::vector<CheckResult> bound_checks(unsigned threads = 0) {
  return {check_gauss_bound_validity(), check_sign_agreement_grid(), check_assumption_violation(1000000, 13, threads)};
}

inline std::vector<CheckResult> dither_checks() { return {check_dither_statistics()}; }

inline std::vector<CheckResult> all_checks(unsigned threads = 0) {
  std::vector<CheckResult> out;
  out.push_back(check_gauss_bound_validity());
  out.push_back(check_sign_agreement_grid());
  const auto theorem = run_theorem_experiments(threads);
  out.push_back(check_theorem_phi(theorem));
  out.push_back(check_theorem_l1(theorem));
  out.push_back(check_dither_statistics());
  out.push_back(check_projection_calibration());
  out.push_back(check_reduction_identities());
  out.push_back(check_sign_geometry_and_scale());
  out.push_back(check_switching_benefit(run_switch_experiments(threads)));
  out.push_back(check_assumption_violation(1000000, 13, threads));
  out.push_back(check_gradient_correctness());
  out.push_back(check_serialization());
  return out;
}

inline std::string format_line(const CheckResult& c) {
  return detail::fmt("[%s] AC%-2d %s: ", c.passed ? "PASS" : "FAIL", c.id, c.name.c_str()) + c.detail;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& c) { return c.passed; });
}

}  // namespace signopt::verify
