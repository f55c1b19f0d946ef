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

#include "tct/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tct {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// P[X <= x] for X ~ Laplace(mu, 1/eps).
double laplace_cdf(double x, double mu, double epsilon) {
  const double z = (x - mu) * epsilon;
  if (z < 0.0) return 0.5 * std::exp(z);
  return 1.0 - 0.5 * std::exp(-z);
}

// P[X > x], as a direct tail rather than 1 - cdf.
double laplace_upper_tail(double x, double mu, double epsilon) {
  const double z = (x - mu) * epsilon;
  if (z > 0.0) return 0.5 * std::exp(-z);
  return 1.0 - 0.5 * std::exp(z);
}

}  // namespace

double query_sum(const Dataset& data, const LinearQuery& query) {
  if (!query.weight) {
    throw std::invalid_argument("query_sum: query has no weight function");
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const double w = query.weight(data, r);
    if (!(w >= 0.0) || w > 1.0) {
      throw std::invalid_argument(
          "query_sum: weight outside [0, 1] at row " + std::to_string(r) +
          (query.description.empty() ? "" : " of " + query.description));
    }
    sum += w;
  }
  return sum;
}

OutcomeLabel OutcomeLabel::above(double noisy_value) {
  OutcomeLabel l;
  l.kind = Kind::kAbove;
  l.value = noisy_value;
  return l;
}
OutcomeLabel OutcomeLabel::below() { return OutcomeLabel{}; }
OutcomeLabel OutcomeLabel::low() {
  OutcomeLabel l;
  l.kind = Kind::kLow;
  return l;
}
OutcomeLabel OutcomeLabel::between() {
  OutcomeLabel l;
  l.kind = Kind::kBetween;
  return l;
}
OutcomeLabel OutcomeLabel::high() {
  OutcomeLabel l;
  l.kind = Kind::kHigh;
  return l;
}
OutcomeLabel OutcomeLabel::chosen(int index) {
  OutcomeLabel l;
  l.kind = Kind::kChosen;
  l.index = index;
  return l;
}

std::string OutcomeLabel::to_string() const {
  switch (kind) {
    case Kind::kAbove:
      return "Above " + format_double(value);
    case Kind::kBelow:
      return "Below";
    case Kind::kLow:
      return "L";
    case Kind::kBetween:
      return "Between";
    case Kind::kHigh:
      return "H";
    case Kind::kChosen:
      return "Chosen " + std::to_string(index);
  }
  return "?";
}

bool OutcomeLabel::operator==(const OutcomeLabel& other) const {
  if (kind != other.kind) return false;
  if (kind == Kind::kAbove) {
    return value == other.value ||
           (std::isnan(value) && std::isnan(other.value));
  }
  if (kind == Kind::kChosen) return index == other.index;
  return true;
}

double laplace_sample(double scale, SplitMix64& rng) {
  return laplace_quantile(rng.next_unit(), scale);
}

MechanismOutcome above_threshold_value(double true_value, double threshold,
                                       double epsilon, SplitMix64& rng) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("above_threshold: epsilon must be positive");
  }
  const double noisy = true_value + laplace_sample(1.0 / epsilon, rng);
  MechanismOutcome out;
  out.privacy = {epsilon, 0.0};
  out.q = not_prior_q(epsilon);
  if (noisy >= threshold) {
    out.label = OutcomeLabel::above(noisy);
    out.target_hit = true;
  } else {
    out.label = OutcomeLabel::below();
    out.target_hit = false;
  }
  return out;
}

MechanismOutcome above_threshold(const Dataset& data, const LinearQuery& query,
                                 double epsilon, SplitMix64& rng) {
  return above_threshold_value(query_sum(data, query), query.threshold,
                               epsilon, rng);
}

double above_threshold_prob(double true_value, double threshold,
                            double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("above_threshold_prob: epsilon must be positive");
  }
  // P[noisy >= t]; the boundary atom has measure zero.
  return laplace_upper_tail(threshold, true_value, epsilon);
}

TestMasses above_threshold_masses(double true_value, double threshold,
                                  double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error(
        "above_threshold_masses: epsilon must be positive");
  }
  return {laplace_cdf(threshold, true_value, epsilon),
          laplace_upper_tail(threshold, true_value, epsilon)};
}

MechanismOutcome between_thresholds_value(double true_value, double t_low,
                                          double t_high, double epsilon,
                                          SplitMix64& rng) {
  if (!(t_low < t_high)) {
    throw std::domain_error("between_thresholds: requires t_low < t_high");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("between_thresholds: epsilon must be positive");
  }
  const double noisy = true_value + laplace_sample(1.0 / epsilon, rng);
  MechanismOutcome out;
  out.privacy = {epsilon, 0.0};
  out.q = between_q(epsilon, t_high - t_low);
  if (noisy < t_low) {
    out.label = OutcomeLabel::low();
  } else if (noisy > t_high) {
    out.label = OutcomeLabel::high();
  } else {
    out.label = OutcomeLabel::between();
    out.target_hit = true;
  }
  return out;
}

MechanismOutcome between_thresholds(const Dataset& data,
                                    const LinearQuery& query, double t_low,
                                    double t_high, double epsilon,
                                    SplitMix64& rng) {
  return between_thresholds_value(query_sum(data, query), t_low, t_high,
                                  epsilon, rng);
}

BandMasses between_thresholds_masses(double true_value, double t_low,
                                     double t_high, double epsilon) {
  if (!(t_low < t_high)) {
    throw std::domain_error(
        "between_thresholds_masses: requires t_low < t_high");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error(
        "between_thresholds_masses: epsilon must be positive");
  }
  BandMasses m;
  m.low = laplace_cdf(t_low, true_value, epsilon);
  m.high = laplace_upper_tail(t_high, true_value, epsilon);
  m.between = 1.0 - m.low - m.high;
  return m;
}

std::vector<double> exponential_choice_probabilities(
    const std::vector<double>& scores, double epsilon) {
  if (scores.empty()) {
    throw std::domain_error("exponential_choice: scores must be nonempty");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("exponential_choice: epsilon must be positive");
  }
  const double max_score = *std::max_element(scores.begin(), scores.end());
  std::vector<double> probs(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(0.5 * epsilon * (scores[i] - max_score));
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

MechanismOutcome exponential_choice(const std::vector<double>& scores,
                                    double epsilon, SplitMix64& rng) {
  const std::vector<double> probs =
      exponential_choice_probabilities(scores, epsilon);
  const double u = rng.next_unit();
  double cum = 0.0;
  std::size_t pick = probs.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) {
      pick = i;
      break;
    }
  }
  MechanismOutcome out;
  out.label = OutcomeLabel::chosen(static_cast<int>(pick));
  out.privacy = {epsilon, 0.0};
  out.q = 1.0;  // full outcome set unless a caller narrows the target
  out.target_hit = true;
  return out;
}

}  // namespace tct
