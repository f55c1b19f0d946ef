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
// The independent certification layer: exact divergence on finite
// distributions, closed-form and brute-force mixture decompositions that
// witness per-hit charge rates, and Monte Carlo privacy auditing. Everything
// here is desk-scale by design and double-checks the engine from the
// outside.

#ifndef TCT_VERIFIER_HPP_
#define TCT_VERIFIER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tct/rng.hpp"

namespace tct {

// Finite probability vector over labeled outcomes. Compared pairs must use
// the same label order.
struct DiscreteDistribution {
  std::vector<std::string> outcomes;
  std::vector<double> masses;

  void validate(double tol = 1e-12) const;
  static DiscreteDistribution bernoulli(double p);  // outcomes {"0", "1"}
};

// Witness that two distributions decompose into a common part and
// epsilon-indistinguishable branches placing at least q mass on a target:
//   Z^b == (1-delta) * (p * common + (1-p) * branch_b) + delta * fail_b.
struct MixtureDecomposition {
  double p = 0.0;
  DiscreteDistribution common;
  DiscreteDistribution branch0;
  DiscreteDistribution branch1;
  std::optional<DiscreteDistribution> fail0;
  std::optional<DiscreteDistribution> fail1;
  double delta = 0.0;
};

// Symmetric max-divergence: max over outcomes of |ln(p_i / q_i)|, infinity
// if exactly one side of any outcome has positive mass. For matched finite
// supports this equals the max over outcome subsets.
double exact_divergence(const DiscreteDistribution& P,
                        const DiscreteDistribution& Q);

// Exact (epsilon, delta)-indistinguishability via the hockey-stick mass
// sum_i max(0, p_i - e^eps q_i) <= delta, both directions.
bool check_indistinguishable(const DiscreteDistribution& P,
                             const DiscreteDistribution& Q, double epsilon,
                             double delta);
double hockey_stick(const DiscreteDistribution& P,
                    const DiscreteDistribution& Q, double epsilon);

// Closed-form decomposition of a pair of epsilon-indistinguishable binary
// distributions with target {1}: pi0 = Pr[Z0 = 1] <= pi1 = Pr[Z1 = 1]
// (callers swap roles otherwise). Both branch target masses are at least
// 1 / (e^eps + 1). Throws std::domain_error if the pair is not
// epsilon-indistinguishable.
MixtureDecomposition binary_decomposition(double pi0, double pi1,
                                          double epsilon);

// Checks a witness against the mixture definition: reconstruction within
// recon_tol per outcome, branch divergence at most epsilon + div_slack, both
// branch target masses at least q.
bool verify_decomposition(const MixtureDecomposition& dec,
                          const DiscreteDistribution& Z0,
                          const DiscreteDistribution& Z1,
                          const std::vector<std::size_t>& target,
                          double epsilon, double q, double recon_tol = 1e-10,
                          double div_slack = 1e-9);

// Brute-force feasibility oracle for small outcome spaces (at most 8
// outcomes). For each mixing weight p the branch-feasibility subproblem is
// solved exactly (the reconstruction constraint eliminates the common part
// and ties branch1 to branch0, leaving per-outcome boxes and a target-mass
// window); p itself is scanned on a 1e-4 grid with local refinement to 1e-7.
// Returns a verified witness, or nothing at the documented resolution.
// delta > 0 inputs first try a pure witness (failure parts equal to the
// inputs), then canonical failure-part extraction.
std::optional<MixtureDecomposition> decomposition_search(
    const DiscreteDistribution& Z0, const DiscreteDistribution& Z1,
    const std::vector<std::size_t>& target, double epsilon, double delta,
    double q);

// Monte Carlo privacy audit of a mechanism on two fixed neighbor inputs.
// Wilson intervals on per-outcome frequencies at the given normal quantile;
// the result is a LOWER bound certificate on the privacy parameter: it can
// falsify a declared epsilon, never prove compliance.
struct AuditOutcome {
  int outcome = 0;
  long long count0 = 0;
  long long count1 = 0;
  double log_ratio_lower = 0.0;
};

struct AuditResult {
  double epsilon_lower = 0.0;
  double z = 0.0;
  long long trials = 0;
  std::vector<AuditOutcome> per_outcome;
};

AuditResult mc_privacy_audit(const std::function<int(SplitMix64&)>& runner0,
                             const std::function<int(SplitMix64&)>& runner1,
                             int num_outcomes, long long trials,
                             std::uint64_t seed, double z = 2.576);

}  // namespace tct

#endif  // TCT_VERIFIER_HPP_
