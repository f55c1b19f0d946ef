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

#include "tct/boundary_wrapper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tct {

double boundary_coin(double pi) {
  if (!(pi >= 0.0) || pi > 1.0) {
    throw std::domain_error("boundary_coin: pi must lie in [0, 1]");
  }
  return std::min(1.0 / 3.0, pi / (1.0 + pi));
}

WrappedOutcome wrap(const OracleMechanism& mechanism, SplitMix64& rng) {
  mechanism.privacy.validate();
  if (mechanism.privacy.delta != 0.0) {
    throw std::invalid_argument("wrap: mechanism must be pure-DP");
  }
  if (!(mechanism.privacy.epsilon > 0.0)) {
    throw std::domain_error("wrap: epsilon must be positive");
  }
  if (!mechanism.sampler || !mechanism.probabilities) {
    throw std::invalid_argument(
        "wrap: mechanism needs a sampler and a probability oracle");
  }
  const std::vector<double> pmf = mechanism.probabilities();
  if (pmf.empty()) {
    throw std::invalid_argument("wrap: probability oracle returned nothing");
  }
  const double modal = *std::max_element(pmf.begin(), pmf.end());
  const double pi = 1.0 - modal;

  WrappedOutcome out;
  out.privacy = {wrapper_privacy(mechanism.privacy.epsilon), 0.0};
  out.q = boundary_q(mechanism.privacy.epsilon);
  if (rng.next_bernoulli(boundary_coin(pi))) {
    out.boundary = true;
    out.target_hit = true;
  } else {
    // A fresh draw from the base mechanism, not conditioned on anything.
    out.outcome = mechanism.sampler(rng);
  }
  return out;
}

std::vector<double> wrapped_pmf(const std::vector<double>& base_pmf) {
  if (base_pmf.empty()) {
    throw std::domain_error("wrapped_pmf: empty base pmf");
  }
  const double modal = *std::max_element(base_pmf.begin(), base_pmf.end());
  const double coin = boundary_coin(1.0 - modal);
  std::vector<double> out;
  out.reserve(base_pmf.size() + 1);
  for (double p : base_pmf) out.push_back((1.0 - coin) * p);
  out.push_back(coin);
  return out;
}

RunTwiceOutcome run_twice(const std::function<int(SplitMix64&)>& sampler,
                          double epsilon, SplitMix64& rng) {
  if (!sampler) {
    throw std::invalid_argument("run_twice: sampler is empty");
  }
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("run_twice: epsilon must be nonnegative");
  }
  RunTwiceOutcome out;
  out.first = sampler(rng);
  out.second = sampler(rng);
  out.privacy = {2.0 * epsilon, 0.0};
  out.q = run_twice_q(epsilon);
  out.target_hit = out.first != out.second;
  return out;
}

std::vector<double> run_twice_pmf(const std::vector<double>& base_pmf) {
  const std::size_t n = base_pmf.size();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i * n + j] = base_pmf[i] * base_pmf[j];
    }
  }
  return out;
}

}  // namespace tct
