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

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "signopt/numeric.hpp"
#include "signopt/optimizers.hpp"
#include "signopt/problems.hpp"

namespace signopt::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string kind = "quadratic";  // quadratic | logistic | mlp
  std::uint64_t dim = 10;
  ParamVector lipschitz;  // quadratic only; one entry broadcasts
  ParamVector x_opt;      // quadratic only; empty means origin
  ParamVector x0;         // empty means the problem's default start
  NoiseFamily noise_family = NoiseFamily::kGaussian;
  ParamVector noise_sigma;  // one entry broadcasts
  double bimodal_q = 0.1;
  std::uint64_t dataset_seed = 0;
  std::uint64_t n_points = 64;
  std::vector<std::uint64_t> layer_widths;  // mlp only
  double reg = 1e-2;                        // logistic only

  bool operator==(const ProblemSpec&) const = default;
};

struct RunSpec {
  std::uint64_t steps = 1000;
  std::uint64_t batch_size = 1;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t record_stride = 0;  // 0 selects the default stride
  bool theorem_mode = false;        // delta := 1/sqrt(L1 K)
  // step-decay schedule: step sizes are multiplied by factor every `every` steps
  double lr_decay_factor = 1.0;
  std::uint64_t lr_decay_every = 0;

  bool operator==(const RunSpec&) const = default;
};

struct ExperimentConfig {
  ProblemSpec problem;
  Algorithm algorithm = Algorithm::kSignSgd;
  OptimizerConfig optimizer;
  RunSpec run;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ConfigError("cannot format number");
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& key, std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid number for " + key + ": '" + std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + std::string(text) + "'");
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline ParamVector parse_vector(const std::string& key, std::string_view text) {
  std::vector<double> values;
  for (const auto& item : split_list(text)) values.push_back(parse_double(key, item));
  return ParamVector(std::move(values));
}

inline std::vector<std::uint64_t> parse_u64_list(const std::string& key, std::string_view text) {
  std::vector<std::uint64_t> values;
  for (const auto& item : split_list(text)) values.push_back(parse_u64(key, item));
  return values;
}

inline std::string format_vector(const ParamVector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

inline std::string format_u64_list(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

inline std::string format_switch(std::uint64_t t) {
  return t == kNeverSwitch ? "inf" : std::to_string(t);
}

}  // namespace detail

/// Ordered (key, value) pairs of the flat configuration format.
inline std::vector<std::pair<std::string, std::string>> to_entries(const ExperimentConfig& c) {
  using namespace detail;
  const auto& p = c.problem;
  const auto& o = c.optimizer;
  const auto& r = c.run;
  return {
      {"problem.kind", p.kind},
      {"problem.dim", std::to_string(p.dim)},
      {"problem.lipschitz", format_vector(p.lipschitz)},
      {"problem.x_opt", format_vector(p.x_opt)},
      {"problem.x0", format_vector(p.x0)},
      {"problem.noise.family", std::string(to_string(p.noise_family))},
      {"problem.noise.sigma", format_vector(p.noise_sigma)},
      {"problem.noise.bimodal_q", format_double(p.bimodal_q)},
      {"problem.dataset_seed", std::to_string(p.dataset_seed)},
      {"problem.n_points", std::to_string(p.n_points)},
      {"problem.layer_widths", format_u64_list(p.layer_widths)},
      {"problem.reg", format_double(p.reg)},
      {"optimizer.algorithm", std::string(to_string(c.algorithm))},
      {"optimizer.delta", format_double(o.delta)},
      {"optimizer.beta", format_double(o.beta)},
      {"optimizer.alpha", format_double(o.alpha)},
      {"optimizer.gamma", format_double(o.gamma)},
      {"optimizer.eta", format_double(o.eta)},
      {"optimizer.epsilon", format_double(o.epsilon)},
      {"optimizer.t_switch", format_switch(o.t_switch)},
      {"optimizer.dither_mode", std::string(to_string(o.dither_mode))},
      {"optimizer.lr", format_double(o.lr)},
      {"optimizer.lambda_init", format_double(o.lambda_init)},
      {"optimizer.bias_correction", o.bias_correction ? "true" : "false"},
      {"run.steps", std::to_string(r.steps)},
      {"run.batch_size", std::to_string(r.batch_size)},
      {"run.seeds", format_u64_list(r.seeds)},
      {"run.record_stride", std::to_string(r.record_stride)},
      {"run.theorem_mode", r.theorem_mode ? "true" : "false"},
      {"run.lr_decay.factor", format_double(r.lr_decay_factor)},
      {"run.lr_decay.every", std::to_string(r.lr_decay_every)},
  };
}

/// Canonical text: every key, fixed order, shortest round-trip numbers.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [key, value] : to_entries(c)) {
    out += key;
    out += value.empty() ? " =" : " = ";
    out += value;
    out += '\n';
  }
  return out;
}

/// Parses `key = value` lines; `#` starts a comment. Missing keys keep their
/// defaults; unknown or repeated keys are errors.
inline ExperimentConfig parse_config(std::string_view text) {
  using namespace detail;
  ExperimentConfig c;
  std::map<std::string, std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!seen.emplace(key, value).second) throw ConfigError("duplicate key: " + key);

    auto& p = c.problem;
    auto& o = c.optimizer;
    auto& r = c.run;
    try {
      if (key == "problem.kind") {
        if (value != "quadratic" && value != "logistic" && value != "mlp") {
          throw ConfigError("unknown problem.kind: " + value);
        }
        p.kind = value;
      } else if (key == "problem.dim") p.dim = parse_u64(key, value);
      else if (key == "problem.lipschitz") p.lipschitz = parse_vector(key, value);
      else if (key == "problem.x_opt") p.x_opt = parse_vector(key, value);
      else if (key == "problem.x0") p.x0 = parse_vector(key, value);
      else if (key == "problem.noise.family") p.noise_family = parse_noise_family(value);
      else if (key == "problem.noise.sigma") p.noise_sigma = parse_vector(key, value);
      else if (key == "problem.noise.bimodal_q") p.bimodal_q = parse_double(key, value);
      else if (key == "problem.dataset_seed") p.dataset_seed = parse_u64(key, value);
      else if (key == "problem.n_points") p.n_points = parse_u64(key, value);
      else if (key == "problem.layer_widths") p.layer_widths = parse_u64_list(key, value);
      else if (key == "problem.reg") p.reg = parse_double(key, value);
      else if (key == "optimizer.algorithm") c.algorithm = parse_algorithm(value);
      else if (key == "optimizer.delta") o.delta = parse_double(key, value);
      else if (key == "optimizer.beta") o.beta = parse_double(key, value);
      else if (key == "optimizer.alpha") o.alpha = parse_double(key, value);
      else if (key == "optimizer.gamma") o.gamma = parse_double(key, value);
      else if (key == "optimizer.eta") o.eta = parse_double(key, value);
      else if (key == "optimizer.epsilon") o.epsilon = parse_double(key, value);
      else if (key == "optimizer.t_switch") o.t_switch = value == "inf" ? kNeverSwitch : parse_u64(key, value);
      else if (key == "optimizer.dither_mode") o.dither_mode = parse_dither_mode(value);
      else if (key == "optimizer.lr") o.lr = parse_double(key, value);
      else if (key == "optimizer.lambda_init") o.lambda_init = parse_double(key, value);
      else if (key == "optimizer.bias_correction") o.bias_correction = parse_bool(key, value);
      else if (key == "run.steps") r.steps = parse_u64(key, value);
      else if (key == "run.batch_size") r.batch_size = parse_u64(key, value);
      else if (key == "run.seeds") r.seeds = parse_u64_list(key, value);
      else if (key == "run.record_stride") r.record_stride = parse_u64(key, value);
      else if (key == "run.theorem_mode") r.theorem_mode = parse_bool(key, value);
      else if (key == "run.lr_decay.factor") r.lr_decay_factor = parse_double(key, value);
      else if (key == "run.lr_decay.every") r.lr_decay_every = parse_u64(key, value);
      else throw ConfigError("unknown key: " + key);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace detail {

inline ParamVector broadcast(const ParamVector& v, std::size_t dim, const char* what) {
  if (v.dim() == dim) return v;
  if (v.dim() == 1) return ParamVector(dim, v[0]);
  throw ConfigError(std::string(what) + " has " + std::to_string(v.dim()) + " entries, expected 1 or " +
                    std::to_string(dim));
}

}  // namespace detail

/// Builds the configured problem, applying scalar broadcasts and x0.
inline Problem build_problem(const ProblemSpec& spec) {
  using detail::broadcast;
  try {
    Problem p;
    if (spec.kind == "quadratic") {
      if (spec.dim < 1) throw ConfigError("problem.dim must be >= 1");
      if (spec.lipschitz.empty()) throw ConfigError("quadratic problem needs problem.lipschitz");
      const ParamVector lip = broadcast(spec.lipschitz, spec.dim, "problem.lipschitz");
      const ParamVector opt =
          spec.x_opt.empty() ? ParamVector(spec.dim, 0.0) : broadcast(spec.x_opt, spec.dim, "problem.x_opt");
      NoiseSpec noise{spec.noise_family,
                      spec.noise_sigma.empty() ? ParamVector(spec.dim, 0.0)
                                               : broadcast(spec.noise_sigma, spec.dim, "problem.noise.sigma"),
                      spec.bimodal_q};
      p = make_quadratic(lip, opt, noise);
    } else if (spec.kind == "logistic") {
      NoiseSpec noise{spec.noise_family,
                      spec.noise_sigma.empty() ? ParamVector(spec.dim, 0.0)
                                               : broadcast(spec.noise_sigma, spec.dim, "problem.noise.sigma"),
                      spec.bimodal_q};
      p = make_logistic(spec.dataset_seed, spec.dim, spec.n_points, noise, spec.reg);
    } else if (spec.kind == "mlp") {
      std::vector<std::size_t> widths(spec.layer_widths.begin(), spec.layer_widths.end());
      if (widths.size() < 3) throw ConfigError("mlp needs problem.layer_widths with >= 3 entries");
      MlpLayout layout{widths};
      const std::size_t dim = layout.num_params();
      NoiseSpec noise{spec.noise_family,
                      spec.noise_sigma.empty() ? ParamVector(dim, 0.0)
                                               : broadcast(spec.noise_sigma, dim, "problem.noise.sigma"),
                      spec.bimodal_q};
      p = make_mlp(spec.dataset_seed, widths, noise, spec.n_points);
    } else {
      throw ConfigError("unknown problem.kind: " + spec.kind);
    }
    if (!spec.x0.empty()) p.x0 = broadcast(spec.x0, p.dim, "problem.x0");
    return p;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace signopt::harness
