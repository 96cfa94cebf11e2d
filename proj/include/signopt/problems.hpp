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
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "signopt/numeric.hpp"
#include "signopt/rng.hpp"

namespace signopt {

enum class NoiseFamily { kGaussian, kUniform, kLaplace, kAsymmetricBimodal };

inline std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kUniform: return "uniform";
    case NoiseFamily::kLaplace: return "laplace";
    case NoiseFamily::kAsymmetricBimodal: return "asymmetric-bimodal";
  }
  throw std::invalid_argument("unsupported noise family");
}

inline NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "uniform") return NoiseFamily::kUniform;
  if (name == "laplace") return NoiseFamily::kLaplace;
  if (name == "asymmetric-bimodal") return NoiseFamily::kAsymmetricBimodal;
  throw std::invalid_argument("unsupported noise family: " + std::string(name));
}

/// Zero-mean, unit-variance draw from a noise family.
///
/// asymmetric-bimodal takes +a with probability q and -b otherwise, with
/// qa = (1-q)b and unit variance: a = sqrt((1-q)/q), b = sqrt(q/(1-q)).
inline double sample_unit_noise(NoiseFamily family, RngStream& rng, double bimodal_q = 0.1) {
  switch (family) {
    case NoiseFamily::kGaussian:
      return rng.normal();
    case NoiseFamily::kUniform:
      // half-width sqrt(3) gives unit variance
      return std::numbers::sqrt3 * (2.0 * rng.uniform() - 1.0);
    case NoiseFamily::kLaplace: {
      // scale 1/sqrt(2) gives unit variance
      const double u = rng.uniform() - 0.5;
      const double mag = -std::log1p(-2.0 * std::abs(u)) / std::numbers::sqrt2;
      return u < 0.0 ? -mag : mag;
    }
    case NoiseFamily::kAsymmetricBimodal: {
      const double q = bimodal_q;
      return rng.uniform() < q ? std::sqrt((1.0 - q) / q) : -std::sqrt(q / (1.0 - q));
    }
  }
  throw std::invalid_argument("unsupported noise family");
}

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGaussian;
  ParamVector sigma;  // per-coordinate single-sample std
  double bimodal_q = 0.1;

  bool operator==(const NoiseSpec&) const = default;
};

/// Objective with exact gradient, coordinate Lipschitz vector and a known
/// lower bound. Immutable after construction; copies share the dataset.
struct Problem {
  std::string kind;
  std::size_t dim = 0;
  std::function<double(const ParamVector&)> eval_f;
  std::function<ParamVector(const ParamVector&)> eval_grad;
  ParamVector lipschitz;
  double f_star = 0.0;
  NoiseSpec noise;
  ParamVector x0;

  double l1_lipschitz() const { return sum(lipschitz); }
  double l1_sigma() const { return sum(noise.sigma); }
};

struct GradSample {
  ParamVector grad;
  std::size_t batch_size = 1;
  ParamVector coord_std;  // sigma_i / sqrt(n)
};

inline void validate_noise(const NoiseSpec& noise, std::size_t dim) {
  if (noise.sigma.dim() != dim) throw DimensionMismatch(noise.sigma.dim(), dim);
  for (double s : noise.sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("noise sigma must be finite and >= 0");
  }
  if (noise.family == NoiseFamily::kAsymmetricBimodal &&
      !(noise.bimodal_q > 0.0 && noise.bimodal_q < 1.0)) {
    throw std::invalid_argument("bimodal_q must lie in (0, 1)");
  }
}

/// f(x) = 1/2 sum_i L_i (x_i - x_opt_i)^2; L is exactly the coordinate
/// Lipschitz vector and f* = 0.
inline Problem make_quadratic(const ParamVector& lipschitz, const ParamVector& x_opt,
                              const NoiseSpec& noise) {
  require_same_dim(lipschitz, x_opt);
  for (double l : lipschitz) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("make_quadratic: negative L_i");
  }
  validate_noise(noise, lipschitz.dim());
  Problem p;
  p.kind = "quadratic";
  p.dim = lipschitz.dim();
  p.eval_f = [lipschitz, x_opt](const ParamVector& x) {
    require_same_dim(x, x_opt);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double e = x[i] - x_opt[i];
      acc += lipschitz[i] * e * e;
    }
    return 0.5 * acc;
  };
  p.eval_grad = [lipschitz, x_opt](const ParamVector& x) {
    require_same_dim(x, x_opt);
    ParamVector g(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) g[i] = lipschitz[i] * (x[i] - x_opt[i]);
    return g;
  };
  p.lipschitz = lipschitz;
  p.f_star = 0.0;
  p.noise = noise;
  p.x0 = ParamVector(p.dim, 0.0);
  return p;
}

namespace detail {

// log(1 + exp(z)) without overflow
inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct LabeledData {
  std::size_t n_points = 0;
  std::size_t dim = 0;
  std::vector<double> features;  // row-major n_points x dim
  std::vector<double> labels;    // +1 / -1

  std::span<const double> row(std::size_t j) const {
    return std::span<const double>(features).subspan(j * dim, dim);
  }
};

}  // namespace detail

/// Regularized logistic regression on a synthetic linearly separable dataset
/// whose labels are flipped by a small Gaussian margin noise.
///
/// Coordinate curvature is mean_j s'(.) a_ji^2 + reg with s' <= 1/4, so
/// L_i = mean_j a_ji^2 / 4 + reg is a valid (conservative) Lipschitz vector.
/// The loss is nonnegative, hence f* = 0.
inline Problem make_logistic(std::uint64_t dataset_seed, std::size_t dim, std::size_t n_points,
                             const NoiseSpec& noise, double reg = 1e-2) {
  if (n_points < 1) throw std::invalid_argument("make_logistic: n_points must be >= 1");
  if (dim < 1) throw std::invalid_argument("make_logistic: dim must be >= 1");
  if (!(reg >= 0.0)) throw std::invalid_argument("make_logistic: negative regularizer");
  validate_noise(noise, dim);

  auto data = std::make_shared<detail::LabeledData>();
  data->n_points = n_points;
  data->dim = dim;
  data->features.resize(n_points * dim);
  data->labels.resize(n_points);
  RngStream rng = RngStream(dataset_seed, 0).derive(StreamTag::kData);
  ParamVector w_true = sample_gaussian(dim, 0.0, 1.0, rng);
  for (std::size_t j = 0; j < n_points; ++j) {
    double margin = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double a = rng.normal();
      data->features[j * dim + i] = a;
      margin += a * w_true[i];
    }
    margin += 0.1 * rng.normal();
    data->labels[j] = margin >= 0.0 ? 1.0 : -1.0;
  }

  Problem p;
  p.kind = "logistic";
  p.dim = dim;
  p.eval_f = [data, reg](const ParamVector& x) {
    if (x.dim() != data->dim) throw DimensionMismatch(x.dim(), data->dim);
    double acc = 0.0;
    for (std::size_t j = 0; j < data->n_points; ++j) {
      double z = 0.0;
      const auto a = data->row(j);
      for (std::size_t i = 0; i < data->dim; ++i) z += a[i] * x[i];
      acc += detail::softplus(-data->labels[j] * z);
    }
    return acc / static_cast<double>(data->n_points) + 0.5 * reg * l2_norm_sq(x);
  };
  p.eval_grad = [data, reg](const ParamVector& x) {
    if (x.dim() != data->dim) throw DimensionMismatch(x.dim(), data->dim);
    ParamVector g(data->dim);
    const double inv_n = 1.0 / static_cast<double>(data->n_points);
    for (std::size_t j = 0; j < data->n_points; ++j) {
      double z = 0.0;
      const auto a = data->row(j);
      for (std::size_t i = 0; i < data->dim; ++i) z += a[i] * x[i];
      const double y = data->labels[j];
      const double coeff = -y * detail::logistic(-y * z) * inv_n;
      for (std::size_t i = 0; i < data->dim; ++i) g[i] += coeff * a[i];
    }
    for (std::size_t i = 0; i < data->dim; ++i) g[i] += reg * x[i];
    return g;
  };
  p.lipschitz = ParamVector(dim, 0.0);
  for (std::size_t j = 0; j < n_points; ++j) {
    const auto a = data->row(j);
    for (std::size_t i = 0; i < dim; ++i) p.lipschitz[i] += a[i] * a[i];
  }
  for (std::size_t i = 0; i < dim; ++i) {
    p.lipschitz[i] = 0.25 * p.lipschitz[i] / static_cast<double>(n_points) + reg;
  }
  p.f_star = 0.0;
  p.noise = noise;
  p.x0 = ParamVector(dim, 0.0);
  return p;
}

/// Parameter layout of a fully connected net: for each layer, the weight
/// matrix (out x in, row-major) followed by the bias vector.
struct MlpLayout {
  std::vector<std::size_t> widths;

  std::size_t num_layers() const { return widths.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += widths[l + 1] * widths[l] + widths[l + 1];
    return off;
  }
  std::size_t bias_offset(std::size_t layer) const {
    return weight_offset(layer) + widths[layer + 1] * widths[layer];
  }
  std::size_t num_params() const { return weight_offset(num_layers()); }
};

namespace detail {

struct MlpData {
  MlpLayout layout;
  LabeledData data;
};

// Returns the mean loss; when grad is non-null, also fills the gradient.
inline double mlp_loss(const MlpData& net, const ParamVector& theta, ParamVector* grad) {
  const auto& layout = net.layout;
  const auto& widths = layout.widths;
  const std::size_t layers = layout.num_layers();
  if (theta.dim() != layout.num_params()) throw DimensionMismatch(theta.dim(), layout.num_params());
  if (grad) *grad = ParamVector(theta.dim(), 0.0);

  std::vector<std::vector<double>> acts(layers + 1);
  std::vector<double> delta, next_delta;
  const double inv_n = 1.0 / static_cast<double>(net.data.n_points);
  double loss = 0.0;

  for (std::size_t j = 0; j < net.data.n_points; ++j) {
    const auto input = net.data.row(j);
    acts[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = widths[l], out = widths[l + 1];
      const std::size_t w0 = layout.weight_offset(l), b0 = layout.bias_offset(l);
      acts[l + 1].assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        double z = theta[b0 + o];
        for (std::size_t i = 0; i < in; ++i) z += theta[w0 + o * in + i] * acts[l][i];
        // hidden layers use tanh; the last layer is a linear logit
        acts[l + 1][o] = (l + 1 < layers) ? std::tanh(z) : z;
      }
    }
    const double y = net.data.labels[j];
    const double logit = acts[layers][0];
    loss += softplus(-y * logit);
    if (!grad) continue;

    delta.assign(1, -y * logistic(-y * logit) * inv_n);
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = widths[l], out = widths[l + 1];
      const std::size_t w0 = layout.weight_offset(l), b0 = layout.bias_offset(l);
      for (std::size_t o = 0; o < out; ++o) {
        (*grad)[b0 + o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) (*grad)[w0 + o * in + i] += delta[o] * acts[l][i];
      }
      if (l == 0) break;
      next_delta.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        double back = 0.0;
        for (std::size_t o = 0; o < out; ++o) back += theta[w0 + o * in + i] * delta[o];
        const double a = acts[l][i];
        next_delta[i] = back * (1.0 - a * a);
      }
      std::swap(delta, next_delta);
    }
  }
  return loss * inv_n;
}

}  // namespace detail

/// Two-class cross-entropy of a tanh MLP with a single output logit on a
/// synthetic two-cluster dataset (clusters at +/-mu, unit spread).
///
/// The coordinate Lipschitz vector is an estimate, not a proof: twice the
/// largest finite-difference diagonal curvature |d^2 f / d theta_i^2| seen
/// at 8 random points in the box |theta_j| <= 1. Bounds that rely on exact
/// L_i should use make_quadratic.
inline Problem make_mlp(std::uint64_t dataset_seed, const std::vector<std::size_t>& layer_widths,
                        const NoiseSpec& noise, std::size_t n_points = 64) {
  if (layer_widths.size() < 3) throw std::invalid_argument("make_mlp: need at least one hidden layer");
  if (layer_widths.back() != 1) throw std::invalid_argument("make_mlp: output width must be 1");
  for (auto w : layer_widths) {
    if (w == 0) throw std::invalid_argument("make_mlp: zero layer width");
  }
  if (n_points < 1) throw std::invalid_argument("make_mlp: n_points must be >= 1");

  auto net = std::make_shared<detail::MlpData>();
  net->layout.widths = layer_widths;
  const std::size_t in = layer_widths.front();
  const std::size_t dim = net->layout.num_params();
  validate_noise(noise, dim);

  auto& data = net->data;
  data.n_points = n_points;
  data.dim = in;
  data.features.resize(n_points * in);
  data.labels.resize(n_points);
  RngStream rng = RngStream(dataset_seed, 0).derive(StreamTag::kData);
  const double mu = 1.5 / std::sqrt(static_cast<double>(in));
  for (std::size_t j = 0; j < n_points; ++j) {
    const double y = (j % 2 == 0) ? 1.0 : -1.0;
    data.labels[j] = y;
    for (std::size_t i = 0; i < in; ++i) data.features[j * in + i] = y * mu + rng.normal();
  }

  Problem p;
  p.kind = "mlp";
  p.dim = dim;
  p.eval_f = [net](const ParamVector& x) { return detail::mlp_loss(*net, x, nullptr); };
  p.eval_grad = [net](const ParamVector& x) {
    ParamVector g;
    detail::mlp_loss(*net, x, &g);
    return g;
  };
  p.f_star = 0.0;
  p.noise = noise;

  RngStream init = RngStream(dataset_seed, 0).derive(StreamTag::kInit);
  p.x0 = sample_gaussian(dim, 0.0, 0.5, init);

  p.lipschitz = ParamVector(dim, 0.0);
  const double h = 1e-4;
  for (int trial = 0; trial < 8; ++trial) {
    ParamVector theta(dim);
    for (std::size_t i = 0; i < dim; ++i) theta[i] = 2.0 * init.uniform() - 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      ParamVector plus = theta, minus = theta;
      plus[i] += h;
      minus[i] -= h;
      const double curv = std::abs(p.eval_grad(plus)[i] - p.eval_grad(minus)[i]) / (2.0 * h);
      p.lipschitz[i] = std::max(p.lipschitz[i], 2.0 * curv);
    }
  }
  return p;
}

/// Average of n independent oracle draws: exact gradient plus sigma_i times
/// the mean of n unit-variance noise samples per coordinate.
inline GradSample stochastic_grad(const Problem& p, const ParamVector& x, std::size_t n,
                                  RngStream& rng);

/// Same draw as stochastic_grad, reusing an already evaluated exact gradient.
inline GradSample stochastic_grad_from(const Problem& p, ParamVector exact, std::size_t n,
                                       RngStream& rng) {
  if (n < 1) throw std::invalid_argument("stochastic_grad: batch size must be >= 1");
  if (exact.dim() != p.dim) throw DimensionMismatch(exact.dim(), p.dim);
  GradSample out;
  out.grad = std::move(exact);
  out.batch_size = n;
  out.coord_std = ParamVector(p.dim);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < p.dim; ++i) out.coord_std[i] = p.noise.sigma[i] / root_n;

  bool noiseless = true;
  for (double s : p.noise.sigma) noiseless = noiseless && s == 0.0;
  if (noiseless) return out;

  std::vector<double> acc(p.dim, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < p.dim; ++i) acc[i] += sample_unit_noise(p.noise.family, rng, p.noise.bimodal_q);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < p.dim; ++i) out.grad[i] += p.noise.sigma[i] * (acc[i] * inv_n);
  return out;
}

inline GradSample stochastic_grad(const Problem& p, const ParamVector& x, std::size_t n,
                                  RngStream& rng) {
  return stochastic_grad_from(p, p.eval_grad(x), n, rng);
}

}  // namespace signopt
