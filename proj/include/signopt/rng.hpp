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

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "signopt/numeric.hpp"

namespace signopt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Well-known purpose tags for streams derived from a run seed.
enum class StreamTag : std::uint64_t {
  kOracle = 1,
  kDither = 2,
  kInit = 3,
  kData = 4,
  kMonteCarlo = 5,
};

/// Seeded xoshiro256** stream keyed by (seed, stream_id).
///
/// The sequence depends only on the key and uses integer arithmetic, so it is
/// identical across platforms. Normal variates use the polar method; their
/// bits depend on the platform's std::log, which is correctly rounded on
/// glibc.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t mix = seed;
    std::uint64_t key = splitmix64(mix);
    mix = key ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    for (auto& word : state_) word = splitmix64(mix);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream for a purpose (and optional index, e.g. an iteration).
  RngStream derive(std::uint64_t tag, std::uint64_t index = 0) const {
    std::uint64_t mix = stream_id_ ^ (tag << 48) ^ (tag * 0x9E3779B97F4A7C15ULL);
    std::uint64_t id = splitmix64(mix) ^ index;
    mix = id;
    return RngStream(seed_, splitmix64(mix));
  }
  RngStream derive(StreamTag tag, std::uint64_t index = 0) const {
    return derive(static_cast<std::uint64_t>(tag), index);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  bool operator==(const RngStream&) const = default;

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// I.i.d. N(mean, std^2) entries. std == 0 returns the constant vector
/// without consuming randomness.
inline ParamVector sample_gaussian(std::size_t dim, double mean, double std_dev,
                                   RngStream& rng) {
  if (!(std_dev >= 0.0)) throw std::invalid_argument("sample_gaussian: negative std");
  ParamVector out(dim, mean);
  if (std_dev == 0.0) return out;
  for (std::size_t i = 0; i < dim; ++i) out[i] = mean + std_dev * rng.normal();
  return out;
}

}  // namespace signopt
