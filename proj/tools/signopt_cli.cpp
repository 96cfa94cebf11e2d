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

// signopt: experiment runner and verification suites.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 usage/config error,
// 3 divergence.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "signopt/signopt.hpp"
#include "signopt/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace signopt;
using namespace signopt::harness;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

constexpr const char* kOutDirEnv = "SIGNOPT_OUTPUT_DIR";

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::vector<std::uint64_t> seeds_from_count(std::uint64_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::uint64_t i = 0; i < count; ++i) seeds[i] = i;
  return seeds;
}

int report_checks(const std::vector<verify::CheckResult>& results) {
  for (const auto& c : results) std::cout << verify::format_line(c) << '\n';
  const bool ok = verify::all_passed(results);
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << std::endl;
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seed_flag, const std::string& out_flag) {
  const ExperimentConfig cfg = load_config(config_path);
  const Problem problem = build_problem(cfg.problem);
  const fs::path out = ensure_dir(resolve_out_dir(out_flag));
  const std::vector<std::uint64_t> seeds = seed_flag.empty() ? cfg.run.seeds : seed_flag;
  bool diverged = false;
  for (std::uint64_t seed : seeds) {
    const RunRecord record = run_single(cfg, problem, seed);
    const std::string stem = "run_seed" + std::to_string(seed);
    emit_csv(record, (out / (stem + ".csv")).string());
    emit_json(cfg, record.summary, (out / (stem + ".json")).string());
    const auto& s = record.summary;
    std::printf("seed %llu: %s final_f=%.6e mean_phi=%.6e mean_l1=%.6e delta=%.6g steps=%llu%s\n",
                static_cast<unsigned long long>(seed), std::string(to_string(cfg.algorithm)).c_str(), s.final_f,
                s.mean_phi, s.mean_l1_grad, s.delta_used, static_cast<unsigned long long>(s.steps_completed),
                s.diverged ? " DIVERGED" : "");
    diverged = diverged || s.diverged;
  }
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_theorem(const std::string& config_path, std::uint64_t seeds, const std::vector<std::uint64_t>& k_grid,
                const std::vector<std::uint64_t>& n_grid, const std::string& out_flag, unsigned threads) {
  const ExperimentConfig cfg = load_config(config_path);
  const TheoremReport report = run_theorem_suite(cfg, seeds_from_count(seeds), k_grid, n_grid, threads);
  nlohmann::ordered_json doc;
  doc["cells"] = nlohmann::ordered_json::array();
  std::printf("%8s %4s %12s %12s %12s %12s %12s  %s\n", "K", "n", "delta", "mean_phi", "rhs_phi", "mean_l1",
              "rhs_l1", "result");
  for (const auto& c : report.cells) {
    const bool ok = c.pass_phi() && c.pass_l1();
    std::printf("%8llu %4llu %12.5e %12.5e %12.5e %12.5e %12.5e  %s\n", static_cast<unsigned long long>(c.iterations),
                static_cast<unsigned long long>(c.batch_size), c.delta, c.mean_phi, c.rhs_phi, c.mean_l1, c.rhs_l1,
                ok ? "pass" : "FAIL");
    doc["cells"].push_back({{"K", c.iterations},
                            {"n", c.batch_size},
                            {"delta", c.delta},
                            {"f0", c.f0},
                            {"mean_phi", c.mean_phi},
                            {"rhs_phi", c.rhs_phi},
                            {"margin_phi", c.rhs_phi - c.mean_phi},
                            {"mean_l1", c.mean_l1},
                            {"rhs_l1", c.rhs_l1},
                            {"margin_l1", c.rhs_l1 - c.mean_l1},
                            {"diverged_runs", c.diverged_runs},
                            {"pass", ok}});
  }
  doc["phi_decay_exponents"] = nlohmann::ordered_json::array();
  for (const auto& [n, p] : report.phi_decay_exponents) {
    std::printf("n=%llu: fitted decay exponent of mean_phi vs K = %.4f\n", static_cast<unsigned long long>(n), p);
    doc["phi_decay_exponents"].push_back({{"n", n}, {"exponent", p}});
  }
  doc["all_pass"] = report.all_pass();
  const fs::path out = ensure_dir(resolve_out_dir(out_flag));
  emit_json(doc, (out / "theorem_suite.json").string());
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int cmd_switch(const std::string& config_path, std::uint64_t seeds, const std::vector<std::uint64_t>& t_grid,
               const std::string& out_flag, unsigned threads) {
  const ExperimentConfig cfg = load_config(config_path);
  const SwitchReport report = run_switch_suite(cfg, t_grid, seeds_from_count(seeds), threads);
  nlohmann::ordered_json doc;
  doc["hybrid"] = nlohmann::ordered_json::array();
  std::printf("%-10s %10s %16s %18s\n", "method", "T_switch", "median_final_f", "median_lambda_bar");
  for (const auto& row : report.hybrid) {
    std::printf("%-10s %10llu %16.6e %18.6e\n", "hybrid", static_cast<unsigned long long>(row.t_switch),
                row.median_final_f(), row.median_lambda_at_switch());
    doc["hybrid"].push_back({{"t_switch", row.t_switch},
                             {"median_final_f", row.median_final_f()},
                             {"median_lambda_at_switch", row.median_lambda_at_switch()},
                             {"final_f", row.final_f},
                             {"lambda_at_switch", row.lambda_at_switch},
                             {"diverged_runs", row.diverged_runs}});
  }
  std::printf("%-10s %10s %16.6e\n", "signsgdm", "-", report.signsgdm.median_final_f());
  std::printf("%-10s %10s %16.6e\n", "sgd", "-", report.sgd.median_final_f());
  doc["signsgdm"] = {{"median_final_f", report.signsgdm.median_final_f()}, {"final_f", report.signsgdm.final_f}};
  doc["sgd"] = {{"median_final_f", report.sgd.median_final_f()}, {"final_f", report.sgd.final_f}};
  const auto& best = report.best_hybrid();
  const bool ok = best.median_final_f() < report.signsgdm.median_final_f();
  doc["best_t_switch"] = best.t_switch;
  doc["hybrid_beats_signsgdm"] = ok;
  const fs::path out = ensure_dir(resolve_out_dir(out_flag));
  emit_json(doc, (out / "switch_suite.json").string());
  std::printf("best T_switch = %llu: %s\n", static_cast<unsigned long long>(best.t_switch),
              ok ? "hybrid below SignSGD-M" : "no improvement over SignSGD-M");
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signopt: sign-based optimizer experiments and verification suites"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads for multi-seed runs (0 = hardware)");

  std::string config_path, out_dir;
  std::vector<std::uint64_t> seed_list;
  auto* run = app.add_subcommand("run", "Run one experiment and write CSV/JSON per seed");
  run->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed_list, "Seed (repeatable); defaults to run.seeds from the config");
  run->add_option("--out", out_dir, std::string("Output directory (default $") + kOutDirEnv + " or .)");

  std::uint64_t seed_count = 20;
  std::vector<std::uint64_t> k_grid{100, 1000, 10000}, n_grid{1, 4, 16};
  auto* theorem = app.add_subcommand("theorem-suite", "Compare seed-averaged metrics to the rate bounds");
  theorem->add_option("--config", config_path, "Configuration file (quadratic problem)")
      ->required()
      ->check(CLI::ExistingFile);
  theorem->add_option("--seeds", seed_count, "Number of seeds (0..N-1)");
  theorem->add_option("--k-grid", k_grid, "Iteration budgets")->delimiter(',');
  theorem->add_option("--n-grid", n_grid, "Batch sizes")->delimiter(',');
  theorem->add_option("--out", out_dir, "Output directory for theorem_suite.json");

  std::vector<std::uint64_t> t_grid{100, 250, 500, 1000, 2000, 5000};
  auto* sw = app.add_subcommand("switch-suite", "Hybrid over a T_switch grid against pure baselines");
  sw->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  sw->add_option("--seeds", seed_count, "Number of seeds (0..N-1)");
  sw->add_option("--t-grid", t_grid, "Switch steps")->delimiter(',');
  sw->add_option("--out", out_dir, "Output directory for switch_suite.json");

  auto* dither = app.add_subcommand("dither-verify", "Monte Carlo check of the dithered-sign statistics");
  auto* bound = app.add_subcommand("bound-verify", "Monte Carlo and grid checks of the sign-failure bound");
  auto* selftest = app.add_subcommand("selftest", "Run every verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path, seed_list, out_dir);
    if (*theorem) return cmd_theorem(config_path, seed_count, k_grid, n_grid, out_dir, threads);
    if (*sw) return cmd_switch(config_path, seed_count, t_grid, out_dir, threads);
    if (*dither) return report_checks(verify::dither_checks());
    if (*bound) return report_checks(verify::bound_checks(threads));
    if (*selftest) return report_checks(verify::all_checks(threads));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
