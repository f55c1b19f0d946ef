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
// Base private mechanisms: Laplace noise, the natural above-threshold test,
// the two-threshold band classifier, and a finite-choice exponential
// mechanism. Each outcome carries its privacy declaration, its per-hit
// charge rate q, and whether it hit its target.

#ifndef TCT_MECHANISMS_HPP_
#define TCT_MECHANISMS_HPP_

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tct/data.hpp"
#include "tct/privacy.hpp"
#include "tct/rng.hpp"

namespace tct {

// Row weight in [0, 1]; sums of these over a dataset are 1-Lipschitz under
// add/remove neighbors.
using QueryFn = std::function<double(const Dataset&, std::size_t row)>;

struct LinearQuery {
  QueryFn weight;
  double threshold = 0.0;
  std::string description;
};

// Sum of query weights over all rows. Throws std::invalid_argument if any
// weight falls outside [0, 1].
double query_sum(const Dataset& data, const LinearQuery& query);

struct OutcomeLabel {
  enum class Kind { kAbove, kBelow, kLow, kBetween, kHigh, kChosen };

  Kind kind = Kind::kBelow;
  double value = std::numeric_limits<double>::quiet_NaN();  // kAbove only
  int index = -1;                                           // kChosen only

  static OutcomeLabel above(double noisy_value);
  static OutcomeLabel below();
  static OutcomeLabel low();
  static OutcomeLabel between();
  static OutcomeLabel high();
  static OutcomeLabel chosen(int index);

  std::string to_string() const;
  bool operator==(const OutcomeLabel& other) const;
};

struct MechanismOutcome {
  OutcomeLabel label;
  PrivacyParams privacy;
  double q = 1.0;
  bool target_hit = false;
};

// One draw from Laplace(0, scale) via the inverse CDF; bit-reproducible given
// the rng state.
double laplace_sample(double scale, SplitMix64& rng);

// Natural above-threshold test: noisy_sum = sum + Lap(1/eps); Above iff
// noisy_sum >= threshold (ties go Above). The noisy value rides along with
// the Above outcome at no extra charge. Target: Above; q = not_prior_q(eps).
MechanismOutcome above_threshold(const Dataset& data, const LinearQuery& query,
                                 double epsilon, SplitMix64& rng);

// Value-level kernel used by the dataset overload, the SVT session, and the
// selection candidates.
MechanismOutcome above_threshold_value(double true_value, double threshold,
                                       double epsilon, SplitMix64& rng);

// Exact Pr[Above] for a given true value: the Laplace tail mass at the
// threshold. Test and audit oracle.
double above_threshold_prob(double true_value, double threshold,
                            double epsilon);

// Exact two-outcome law of the test. Each mass is computed as a direct
// Laplace tail, so neither side loses relative precision near 0 or 1.
struct TestMasses {
  double below = 0.0;
  double above = 0.0;
};
TestMasses above_threshold_masses(double true_value, double threshold,
                                  double epsilon);

// Two-threshold classifier on a 1-Lipschitz value: noisy = value + Lap(1/eps);
// Low if noisy < t_low, High if noisy > t_high, Between otherwise (both
// boundary points classify Between). Target: Between; q = between_q.
MechanismOutcome between_thresholds_value(double true_value, double t_low,
                                          double t_high, double epsilon,
                                          SplitMix64& rng);

MechanismOutcome between_thresholds(const Dataset& data,
                                    const LinearQuery& query, double t_low,
                                    double t_high, double epsilon,
                                    SplitMix64& rng);

// Exact outcome masses (Low, Between, High) of the classifier. Oracle for
// the verifier and the q identity checks.
struct BandMasses {
  double low = 0.0;
  double between = 0.0;
  double high = 0.0;
};
BandMasses between_thresholds_masses(double true_value, double t_low,
                                     double t_high, double epsilon);

// Finite-choice exponential mechanism over 1-Lipschitz scores: index j with
// probability proportional to exp(eps * score[j] / 2). Exposes its exact
// outcome probabilities, which is what makes it wrappable with a probability
// oracle. The bare mechanism's target is the full outcome set (q = 1).
MechanismOutcome exponential_choice(const std::vector<double>& scores,
                                    double epsilon, SplitMix64& rng);

std::vector<double> exponential_choice_probabilities(
    const std::vector<double>& scores, double epsilon);

}  // namespace tct

#endif  // TCT_MECHANISMS_HPP_
