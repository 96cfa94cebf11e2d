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
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signopt/harness/config.hpp"
#include "signopt/harness/run.hpp"

namespace signopt::harness {

inline constexpr const char* kCsvHeader = "k,f,l1_grad,phi,lambda,lambda_ema,sigma_dither_sq,phase";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits: enough to round-trip any double.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const RunRecord& record, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : record.rows) {
    out << r.k << ',' << format_real(r.f) << ',' << format_real(r.l1_grad) << ',' << format_real(r.phi) << ','
        << format_real(r.lambda) << ',' << format_real(r.lambda_ema) << ',' << format_real(r.sigma_dither_sq)
        << ',' << to_string(r.phase) << '\n';
  }
}

inline void emit_csv(const RunRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_csv(record, out);
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<RecordRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError("bad CSV header");
  std::vector<RecordRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw IoError("bad CSV row: " + line);
    RecordRow r;
    try {
      r.k = std::stoull(cells[0]);
      r.f = std::strtod(cells[1].c_str(), nullptr);
      r.l1_grad = std::strtod(cells[2].c_str(), nullptr);
      r.phi = std::strtod(cells[3].c_str(), nullptr);
      r.lambda = std::strtod(cells[4].c_str(), nullptr);
      r.lambda_ema = std::strtod(cells[5].c_str(), nullptr);
      r.sigma_dither_sq = std::strtod(cells[6].c_str(), nullptr);
      r.phase = parse_phase(cells[7]);
    } catch (const std::exception& e) {
      throw IoError("bad CSV row: " + line + " (" + e.what() + ")");
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<RecordRow> parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return read_csv(in);
}

namespace detail {

// JSON has no inf/nan; non-finite values become null.
inline nlohmann::ordered_json real(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json summary_json(const ExperimentConfig& cfg, const RunSummary& s) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : to_entries(cfg)) config[key] = value;
  nlohmann::ordered_json j;
  j["config"] = config;
  j["seed"] = s.seed;
  j["algorithm"] = std::string(to_string(cfg.algorithm));
  j["delta_used"] = detail::real(s.delta_used);
  j["theorem_mode"] = cfg.run.theorem_mode;
  j["steps_requested"] = s.steps_requested;
  j["steps_completed"] = s.steps_completed;
  j["oracle_calls"] = s.oracle_calls;
  j["diverged"] = s.diverged;
  j["f0"] = detail::real(s.f0);
  j["final_f"] = detail::real(s.final_f);
  j["mean_phi"] = detail::real(s.mean_phi);
  j["mean_l1_grad"] = detail::real(s.mean_l1_grad);
  j["lambda_at_switch"] = detail::real(s.lambda_at_switch);
  j["wall_time_s"] = s.wall_time_s;
  return j;
}

inline void emit_json(const nlohmann::ordered_json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline void emit_json(const ExperimentConfig& cfg, const RunSummary& summary, const std::string& path) {
  emit_json(summary_json(cfg, summary), path);
}

}  // namespace signopt::harness
