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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "signopt/harness/config.hpp"
#include "signopt/harness/run.hpp"
#include "signopt/theory.hpp"

namespace signopt::harness {

/// Evaluates fn(0..count-1) on up to `threads` workers; results are stored
/// by index so the outcome does not depend on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn, unsigned threads = 0) {
  std::vector<T> out(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Mean over seeds, summed in ascending seed order so the result does not
/// depend on the order the seeds were listed in.
inline double seed_mean(std::vector<std::pair<std::uint64_t, double>> per_seed) {
  if (per_seed.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(per_seed.begin(), per_seed.end());
  double acc = 0.0;
  for (const auto& [seed, v] : per_seed) acc += v;
  return acc / static_cast<double>(per_seed.size());
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Least-squares slope of log(value) against log(K), negated: a quantity
/// decaying like K^-p yields p.
inline double fit_decay_exponent(const std::vector<double>& ks, const std::vector<double>& values) {
  if (ks.size() != values.size() || ks.size() < 2) throw std::invalid_argument("fit_decay_exponent: need >= 2 points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mx += std::log(ks[i]);
    my += std::log(values[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double dx = std::log(ks[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  return -sxy / sxx;
}

struct TheoremCell {
  std::uint64_t iterations = 0;
  std::uint64_t batch_size = 0;
  double delta = 0.0;
  double f0 = 0.0;
  double mean_phi = 0.0;  // seed average of (1/K) sum_k Phi_k
  double mean_l1 = 0.0;   // seed average of (1/K) sum_k ||g_k||_1
  double rhs_phi = 0.0;
  double rhs_l1 = 0.0;
  std::size_t diverged_runs = 0;

  bool pass_phi() const { return diverged_runs == 0 && mean_phi <= rhs_phi; }
  bool pass_l1() const { return diverged_runs == 0 && mean_l1 <= rhs_l1; }
};

struct TheoremReport {
  std::vector<TheoremCell> cells;
  // per batch size, exponent p of mean_phi ~ K^-p across the K grid
  std::vector<std::pair<std::uint64_t, double>> phi_decay_exponents;

  bool all_pass() const {
    return std::all_of(cells.begin(), cells.end(), [](const TheoremCell& c) { return c.pass_phi() && c.pass_l1(); });
  }
};

/// Runs the configured problem in theorem mode (delta = 1/sqrt(L1 K)) for
/// every (K, n) cell and compares seed-averaged metrics to the rate bounds.
inline TheoremReport run_theorem_suite(const ExperimentConfig& cfg_base, const std::vector<std::uint64_t>& seeds,
                                       const std::vector<std::uint64_t>& k_grid,
                                       const std::vector<std::uint64_t>& n_grid, unsigned threads = 0) {
  if (cfg_base.problem.kind != "quadratic") throw ConfigError("theorem suite needs the quadratic problem");
  if (seeds.empty() || k_grid.empty() || n_grid.empty()) throw ConfigError("theorem suite needs seeds and grids");
  const Problem problem = build_problem(cfg_base.problem);
  const double f0 = problem.eval_f(problem.x0);

  TheoremReport report;
  for (std::uint64_t n : n_grid) {
    for (std::uint64_t k : k_grid) {
      ExperimentConfig cfg = cfg_base;
      cfg.run.theorem_mode = true;
      cfg.run.steps = k;
      cfg.run.batch_size = n;
      cfg.run.lr_decay_every = 0;
      const auto runs = parallel_map<RunSummary>(
          seeds.size(), [&](std::size_t i) { return run_single(cfg, problem, seeds[i]).summary; }, threads);

      TheoremCell cell;
      cell.iterations = k;
      cell.batch_size = n;
      cell.delta = theorem_stepsize(problem.l1_lipschitz(), k);
      cell.f0 = f0;
      std::vector<std::pair<std::uint64_t, double>> phi, l1;
      for (const auto& r : runs) {
        phi.emplace_back(r.seed, r.mean_phi);
        l1.emplace_back(r.seed, r.mean_l1_grad);
        cell.diverged_runs += r.diverged;
      }
      cell.mean_phi = seed_mean(phi);
      cell.mean_l1 = seed_mean(l1);
      TheoremInputs t{problem.l1_lipschitz(), problem.l1_sigma(), f0, problem.f_star, k, n};
      cell.rhs_phi = theorem_rhs_phi(t);
      cell.rhs_l1 = theorem_rhs_l1(t);
      report.cells.push_back(cell);
    }
    if (k_grid.size() >= 2) {
      std::vector<double> ks, vals;
      for (const auto& c : report.cells) {
        if (c.batch_size != n) continue;
        ks.push_back(static_cast<double>(c.iterations));
        vals.push_back(c.mean_phi);
      }
      report.phi_decay_exponents.emplace_back(n, fit_decay_exponent(ks, vals));
    }
  }
  return report;
}

struct SwitchRow {
  std::string label;  // "hybrid", "signsgdm" or "sgd"
  std::uint64_t t_switch = kNeverSwitch;
  std::vector<double> final_f;           // per seed, in seed-list order
  std::vector<double> lambda_at_switch;  // hybrid only
  std::size_t diverged_runs = 0;

  double median_final_f() const { return median(final_f); }
  double median_lambda_at_switch() const { return median(lambda_at_switch); }
};

struct SwitchReport {
  std::vector<SwitchRow> hybrid;
  SwitchRow signsgdm;
  SwitchRow sgd;

  const SwitchRow& best_hybrid() const {
    return *std::min_element(hybrid.begin(), hybrid.end(), [](const SwitchRow& a, const SwitchRow& b) {
      return a.median_final_f() < b.median_final_f();
    });
  }
};

/// Hybrid runs over a T_switch grid plus pure SignSGD-M and pure SGD
/// baselines with the same step budget and seeds.
inline SwitchReport run_switch_suite(const ExperimentConfig& cfg_base, const std::vector<std::uint64_t>& t_switch_grid,
                                     const std::vector<std::uint64_t>& seeds, unsigned threads = 0) {
  if (seeds.empty() || t_switch_grid.empty()) throw ConfigError("switch suite needs seeds and a T_switch grid");
  const Problem problem = build_problem(cfg_base.problem);

  auto run_row = [&](ExperimentConfig cfg, std::string label) {
    SwitchRow row;
    row.label = std::move(label);
    row.t_switch = cfg.optimizer.t_switch;
    const auto runs = parallel_map<RunSummary>(
        seeds.size(), [&](std::size_t i) { return run_single(cfg, problem, seeds[i]).summary; }, threads);
    for (const auto& r : runs) {
      row.final_f.push_back(r.final_f);
      row.diverged_runs += r.diverged;
      if (cfg.algorithm == Algorithm::kHybrid) row.lambda_at_switch.push_back(r.lambda_at_switch);
    }
    return row;
  };

  SwitchReport report;
  for (std::uint64_t t : t_switch_grid) {
    ExperimentConfig cfg = cfg_base;
    cfg.algorithm = Algorithm::kHybrid;
    cfg.optimizer.t_switch = t;
    report.hybrid.push_back(run_row(cfg, "hybrid"));
  }
  ExperimentConfig sign_cfg = cfg_base;
  sign_cfg.algorithm = Algorithm::kSignSgdM;
  sign_cfg.optimizer.t_switch = kNeverSwitch;
  report.signsgdm = run_row(sign_cfg, "signsgdm");
  ExperimentConfig sgd_cfg = cfg_base;
  sgd_cfg.algorithm = Algorithm::kSgd;
  report.sgd = run_row(sgd_cfg, "sgd");
  return report;
}

}  // namespace signopt::harness
