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
// Closed-form privacy arithmetic: per-hit charge rates (q values) for every
// target family the engine supports, composition bounds, and Chernoff-based
// calibration of the target-hit budget tau. All logarithms are natural.

#ifndef TCT_PRIVACY_HPP_
#define TCT_PRIVACY_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace tct {

// An (epsilon, delta) pair; the currency of all accounting.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  void validate() const {
    if (!(epsilon >= 0.0)) {
      throw std::domain_error("epsilon must be nonnegative");
    }
    if (!(delta >= 0.0) || delta >= 1.0) {
      throw std::domain_error("delta must lie in [0, 1)");
    }
  }
};

// Per-hit charge efficiency in (0, 1]. 1/q is the overhead factor: the number
// of private accesses each target hit stands in for.
class QValue {
 public:
  explicit QValue(double q) : q_(q) {
    if (!(q > 0.0) || q > 1.0) {
      throw std::domain_error("q must lie in (0, 1]");
    }
  }

  double value() const { return q_; }
  double overhead() const { return 1.0 / q_; }

 private:
  double q_;
};

// Budget knobs for the tail bound: tau target hits allowed, slack factor
// alpha, cumulative-delta budget tau_delta.
struct TailParams {
  int tau = 1;
  double alpha = 1.0;
  double tau_delta = 0.0;

  void validate() const {
    if (tau < 1) throw std::domain_error("tau must be at least 1");
    if (!(alpha > 0.0)) throw std::domain_error("alpha must be positive");
    if (!(tau_delta >= 0.0)) {
      throw std::domain_error("tau_delta must be nonnegative");
    }
  }
};

// q of a not-prior target (all outcomes except one designated prior) of an
// epsilon-DP algorithm: 1 / (e^eps + 1). Decreasing in epsilon, at most 1/2.
double not_prior_q(double epsilon);

// q of the "between" outcome of the two-threshold Laplace classifier with
// threshold gap `gap`: (1 - e^{-gap*eps}) * (e^eps - 1) / (e^{2eps} - 1).
double between_q(double epsilon, double gap);

// Privacy parameter of a boundary-wrapped epsilon-DP algorithm. The wrapper
// is t(eps)-DP with t(eps) <= (4/3) eps; the engine accounts at the bound.
double wrapper_privacy(double epsilon);

// q of the synthetic boundary outcome of a wrapped epsilon-DP algorithm:
// (e^{t} - 1) / (2 (e^{eps+t} - 1)) with t = wrapper_privacy(eps).
// Small-epsilon limit is 2/7.
double boundary_q(double epsilon);

// q of the "two independent runs disagree" target when an epsilon-DP
// algorithm is run twice: 1 - sqrt(e^{2eps} / (1 + e^{2eps})). The paired
// run is 2*eps-DP.
double run_twice_q(double epsilon);

PrivacyParams basic_composition(int count, double epsilon);

// (1/2) r eps^2 + eps sqrt(2 r ln(1/delta)), delta in (0, 1).
PrivacyParams advanced_composition(int count, double epsilon, double delta);

// Tail mass of the hit-budget failure event: e^{-alpha^2 tau / (2 (1+alpha))}.
double delta_star(int tau, double alpha);

enum class ChernoffForm {
  kRaw,         // tau >= ln(1/d*) / (alpha - ln(1+alpha)); tighter
  kSimplified,  // tau >= 2 (1+alpha) / alpha^2 * ln(1/d*)
};

// Leading constant of the tau calibration: tau >= constant * ln(1/delta*).
double min_tau_constant(double alpha, ChernoffForm form = ChernoffForm::kRaw);

// Smallest integer hit budget achieving failure mass delta_star, floored at 1.
int min_tau(double alpha, double delta_star,
            ChernoffForm form = ChernoffForm::kRaw);

// End-to-end bound of a target-charged interaction: tau hits at per-call
// epsilon, session charge rate q, accumulated per-call delta c_delta.
// Without target_delta: basic composition over (1+alpha) tau / q calls,
//   ((1+alpha) (tau/q) eps, c_delta + delta_star(tau, alpha)).
// With target_delta: advanced composition,
//   ((1/2)(1+alpha)(tau/q) eps^2 + eps sqrt((1+alpha)(tau/q) ln(1/delta)),
//    delta + c_delta + delta_star(tau, alpha)).
PrivacyParams tct_bound(const TailParams& tail, double epsilon, double q,
                        double c_delta,
                        std::optional<double> target_delta = std::nullopt);

}  // namespace tct

#endif  // TCT_PRIVACY_HPP_
