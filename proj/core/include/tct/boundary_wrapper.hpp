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
//
// Boundary wrapping: augment a private classifier with a synthetic boundary
// outcome whose probability tracks the non-modal mass, so privacy is charged
// only on uncertain queries. Mechanisms that expose exact outcome
// probabilities use the oracle wrapper; blackbox mechanisms use the
// run-twice wrapper instead.

#ifndef TCT_BOUNDARY_WRAPPER_HPP_
#define TCT_BOUNDARY_WRAPPER_HPP_

#include <functional>
#include <string>
#include <vector>

#include "tct/privacy.hpp"
#include "tct/rng.hpp"

namespace tct {

// A pure-DP mechanism over a finite outcome space together with its exact
// outcome probabilities on the current dataset (the probability oracle).
struct OracleMechanism {
  std::vector<std::string> outcome_names;
  std::function<int(SplitMix64&)> sampler;  // draws an outcome index
  std::function<std::vector<double>()> probabilities;
  PrivacyParams privacy;  // delta must be 0
};

struct WrappedOutcome {
  bool boundary = false;
  int outcome = -1;  // passthrough outcome index when !boundary
  PrivacyParams privacy;
  double q = 0.0;
  bool target_hit = false;  // iff boundary
};

// Coin probability of the boundary outcome given the non-modal mass pi:
// min(1/3, pi / (1 + pi)).
double boundary_coin(double pi);

// Draws from the wrapped mechanism: with the boundary coin return the
// boundary outcome (a hit), otherwise return a fresh sample of the base
// mechanism. Declares privacy wrapper_privacy(eps) and q = boundary_q(eps).
WrappedOutcome wrap(const OracleMechanism& mechanism, SplitMix64& rng);

// Exact law of the wrapped mechanism: base outcome masses scaled by
// (1 - coin), with the boundary mass appended last.
std::vector<double> wrapped_pmf(const std::vector<double>& base_pmf);

struct RunTwiceOutcome {
  int first = -1;
  int second = -1;
  PrivacyParams privacy;  // (2 eps, 0) by composition of the two runs
  double q = 0.0;
  bool target_hit = false;  // iff the two outcomes differ
};

// Blackbox wrapper: run the mechanism twice independently, publish both
// outcomes, hit iff they disagree. q = run_twice_q(eps).
RunTwiceOutcome run_twice(const std::function<int(SplitMix64&)>& sampler,
                          double epsilon, SplitMix64& rng);

// Exact law of the published pair for a given base pmf, as a row-major
// n x n matrix of Pr[(first, second)]. Test oracle.
std::vector<double> run_twice_pmf(const std::vector<double>& base_pmf);

}  // namespace tct

#endif  // TCT_BOUNDARY_WRAPPER_HPP_
