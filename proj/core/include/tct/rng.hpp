// Copyright 2026 The TCT Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TCT_RNG_HPP_
#define TCT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tct {

// Counter-based SplitMix64 stream. Every randomized component in the engine
// draws from one of these, so a (seed, derivation path) pair pins the whole
// transcript bit-for-bit across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0, 1): 53 random bits centered in their
  // bucket, so 0 and 1 are never produced and quantile transforms stay finite.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool next_bernoulli(double prob) {
    if (prob < 0.0 || prob > 1.0) {
      throw std::domain_error("bernoulli probability outside [0, 1]");
    }
    return next_unit() < prob;
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Derives an independent stream for sub-computation `index` (call id,
// candidate id, trial id). One SplitMix64 step over seed XOR a
// golden-ratio multiple of index keeps streams decorrelated and the
// derivation order-free.
inline SplitMix64 derive_rng(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mixer(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
  return SplitMix64(mixer.next_u64());
}

// Laplace quantile with location 0. Median maps to 0 exactly.
inline double laplace_quantile(double u, double scale) {
  if (scale <= 0.0) {
    throw std::domain_error("laplace scale must be positive");
  }
  if (u <= 0.0 || u >= 1.0) {
    throw std::domain_error("laplace quantile argument outside (0, 1)");
  }
  if (u < 0.5) {
    return scale * std::log(2.0 * u);
  }
  return -scale * std::log(2.0 * (1.0 - u));
}

}  // namespace tct

#endif  // TCT_RNG_HPP_
