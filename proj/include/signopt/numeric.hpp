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
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace signopt {

/// Dense real vector holding iterates, momenta and gradients.
///
/// The dimension is fixed at construction; kernels that return a vector of
/// the same shape never change it.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                              " vs " + std::to_string(b)) {}
};

inline void require_same_dim(const ParamVector& a, const ParamVector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
}

/// sign(0) is 0, which keeps sign_vec odd.
inline double sign(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

inline ParamVector sign_vec(const ParamVector& v) {
  ParamVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = sign(v[i]);
  return out;
}

inline double inner(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double l1_norm(const ParamVector& v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

inline double l2_norm_sq(const ParamVector& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

inline double sum(const ParamVector& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

// out = a + scale * b
inline ParamVector axpy(const ParamVector& a, double scale, const ParamVector& b) {
  require_same_dim(a, b);
  ParamVector out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + scale * b[i];
  return out;
}

inline ParamVector scaled(const ParamVector& v, double c) {
  ParamVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = c * v[i];
  return out;
}

}  // namespace signopt
