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

#include "tct/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxOutcomes = 8;
constexpr double kCoarseStep = 1e-4;
constexpr double kFineStep = 1e-7;
constexpr double kFeasSlack = 1e-11;

void require_same_space(const DiscreteDistribution& P,
                        const DiscreteDistribution& Q) {
  if (P.outcomes != Q.outcomes) {
    throw std::invalid_argument("verifier: outcome spaces differ");
  }
  P.validate();
  Q.validate();
}

// Feasibility of the branch subproblem at a fixed mixing weight p, delta=0.
// With s = 1-p and d_i = z1_i - z0_i, branch0 masses x_i must satisfy
//   x_i >= 0,                      x_i <= z0_i / s   (common part stays >= 0)
//   x_i >= -d_i / s,               x_i <= 1 - d_i/s  (branch1 in [0, 1])
//   x_i >= max(d_i, -e^eps d_i) / (s (e^eps - 1))    (branch ratio bounds)
//   sum x = 1
//   sum_{target} x >= max(q, q - D/s), D = sum_{target} d_i.
// Box feasibility plus the target-mass window decide the subproblem exactly.
struct PSolve {
  bool feasible = false;
  double violation = kInf;  // how far from feasible; drives refinement
  std::vector<double> x;    // witness branch0 when feasible
};

PSolve solve_at_p(const std::vector<double>& z0, const std::vector<double>& z1,
                  const std::vector<bool>& in_target, double epsilon, double q,
                  double p) {
  const std::size_t n = z0.size();
  PSolve out;
  if (p >= 1.0) {  // degenerate handled by caller
    return out;
  }
  const double s = 1.0 - p;
  const double ratio_denom = s * std::expm1(epsilon);

  std::vector<double> lo(n), hi(n);
  double worst_box = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = z1[i] - z0[i];
    double l = std::max(0.0, -d / s);
    l = std::max(l, std::max(d, -std::exp(epsilon) * d) / ratio_denom);
    double h = std::min(z0[i] / s, 1.0 - d / s);
    lo[i] = l;
    hi[i] = h;
    worst_box = std::max(worst_box, l - h);
  }

  double sum_lo = 0.0, sum_hi = 0.0;
  double t_lo = 0.0, t_hi = 0.0, c_lo = 0.0, c_hi = 0.0, d_target = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_lo += lo[i];
    sum_hi += hi[i];
    if (in_target[i]) {
      t_lo += lo[i];
      t_hi += hi[i];
      d_target += z1[i] - z0[i];
    } else {
      c_lo += lo[i];
      c_hi += hi[i];
    }
  }

  const double a_lo = std::max(t_lo, 1.0 - c_hi);
  const double a_hi = std::min(t_hi, 1.0 - c_lo);
  const double required = std::max(q, q - d_target / s);

  double violation = worst_box;
  violation = std::max(violation, sum_lo - 1.0);
  violation = std::max(violation, 1.0 - sum_hi);
  violation = std::max(violation, a_lo - a_hi);
  violation = std::max(violation, required - a_hi);
  out.violation = violation;
  if (violation > kFeasSlack) return out;

  // Build a witness: put target mass a = max(required, a_lo) clamped into
  // the window, then fill boxes greedily.
  const double a = std::min(a_hi, std::max(required, a_lo));
  out.x.assign(n, 0.0);
  double need_t = a, need_c = 1.0 - a;
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = lo[i];
    (in_target[i] ? need_t : need_c) -= lo[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double& need = in_target[i] ? need_t : need_c;
    if (need <= 0.0) continue;
    const double add = std::min(need, hi[i] - out.x[i]);
    out.x[i] += add;
    need -= add;
  }
  if (need_t > 1e-9 || need_c > 1e-9) return out;  // numeric corner; reject
  out.feasible = true;
  return out;
}

MixtureDecomposition assemble(const DiscreteDistribution& Z0,
                              const DiscreteDistribution& Z1, double p,
                              const std::vector<double>& x) {
  const std::size_t n = Z0.masses.size();
  const double s = 1.0 - p;
  MixtureDecomposition dec;
  dec.p = p;
  dec.branch0.outcomes = Z0.outcomes;
  dec.branch1.outcomes = Z0.outcomes;
  dec.common.outcomes = Z0.outcomes;
  dec.branch0.masses = x;
  dec.branch1.masses.resize(n);
  dec.common.masses.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    dec.branch1.masses[i] = x[i] + (Z1.masses[i] - Z0.masses[i]) / s;
    dec.branch1.masses[i] = std::max(0.0, dec.branch1.masses[i]);
  }
  if (p > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      dec.common.masses[i] =
          std::max(0.0, (Z0.masses[i] - s * x[i]) / p);
    }
  } else {
    dec.common.masses[0] = 1.0;  // unused at p = 0
  }
  return dec;
}

std::vector<bool> target_mask(std::size_t n,
                              const std::vector<std::size_t>& target) {
  std::vector<bool> mask(n, false);
  for (std::size_t idx : target) {
    if (idx >= n) {
      throw std::invalid_argument("verifier: target index out of range");
    }
    mask[idx] = true;
  }
  return mask;
}

double target_mass(const DiscreteDistribution& d,
                   const std::vector<bool>& mask) {
  double m = 0.0;
  for (std::size_t i = 0; i < d.masses.size(); ++i) {
    if (mask[i]) m += d.masses[i];
  }
  return m;
}

// Pure (delta = 0) search over the p grid with refinement. Returns a
// verified decomposition or nothing.
std::optional<MixtureDecomposition> search_pure(
    const DiscreteDistribution& Z0, const DiscreteDistribution& Z1,
    const std::vector<std::size_t>& target, double epsilon, double q) {
  const std::size_t n = Z0.masses.size();
  const std::vector<bool> mask = target_mask(n, target);

  // p = 1: the branches are unconstrained by reconstruction, so any
  // identical pair with a nonempty target admits any q.
  bool identical = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(Z0.masses[i] - Z1.masses[i]) > 1e-15) identical = false;
  }
  if (identical && !target.empty()) {
    MixtureDecomposition dec;
    dec.p = 1.0;
    dec.common = Z0;
    dec.branch0.outcomes = Z0.outcomes;
    dec.branch0.masses.assign(n, 0.0);
    dec.branch0.masses[target.front()] = 1.0;
    dec.branch1 = dec.branch0;
    return dec;
  }

  auto try_p = [&](double p) -> std::optional<MixtureDecomposition> {
    const PSolve sol = solve_at_p(Z0.masses, Z1.masses, mask, epsilon, q, p);
    if (!sol.feasible) return std::nullopt;
    MixtureDecomposition dec = assemble(Z0, Z1, p, sol.x);
    if (!verify_decomposition(dec, Z0, Z1, target, epsilon, q)) {
      return std::nullopt;
    }
    return dec;
  };

  double best_violation = kInf;
  double best_p = 0.0;
  const long steps = static_cast<long>(std::llround(1.0 / kCoarseStep));
  for (long k = 0; k < steps; ++k) {
    const double p = static_cast<double>(k) * kCoarseStep;
    const PSolve sol = solve_at_p(Z0.masses, Z1.masses, mask, epsilon, q, p);
    if (sol.feasible) {
      if (auto dec = try_p(p)) return dec;
    }
    if (sol.violation < best_violation) {
      best_violation = sol.violation;
      best_p = p;
    }
  }

  // Local refinement around the least-infeasible coarse point.
  double step = kCoarseStep;
  double center = best_p;
  while (step > kFineStep) {
    step /= 10.0;
    for (int k = -10; k <= 10; ++k) {
      const double p = center + static_cast<double>(k) * step;
      if (p < 0.0 || p >= 1.0) continue;
      const PSolve sol =
          solve_at_p(Z0.masses, Z1.masses, mask, epsilon, q, p);
      if (sol.feasible) {
        if (auto dec = try_p(p)) return dec;
      }
      if (sol.violation < best_violation) {
        best_violation = sol.violation;
        center = p;
      }
    }
  }
  return std::nullopt;
}

double wilson_lower(long long successes, long long trials, double z) {
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return std::max(0.0, (center - half) / denom);
}

double wilson_upper(long long successes, long long trials, double z) {
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = phat + z2 / (2.0 * n);
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return std::min(1.0, (center + half) / denom);
}

}  // namespace

void DiscreteDistribution::validate(double tol) const {
  if (outcomes.size() != masses.size()) {
    throw std::invalid_argument(
        "distribution: outcome and mass counts differ");
  }
  if (outcomes.empty()) {
    throw std::invalid_argument("distribution: empty");
  }
  double sum = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0)) {
      throw std::invalid_argument("distribution: negative mass");
    }
    sum += m;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("distribution: masses do not sum to 1");
  }
}

DiscreteDistribution DiscreteDistribution::bernoulli(double p) {
  if (!(p >= 0.0) || p > 1.0) {
    throw std::domain_error("bernoulli: p must lie in [0, 1]");
  }
  return {{"0", "1"}, {1.0 - p, p}};
}

double exact_divergence(const DiscreteDistribution& P,
                        const DiscreteDistribution& Q) {
  require_same_space(P, Q);
  double worst = 0.0;
  for (std::size_t i = 0; i < P.masses.size(); ++i) {
    const double p = P.masses[i], q = Q.masses[i];
    if (p == 0.0 && q == 0.0) continue;
    if (p == 0.0 || q == 0.0) return kInf;
    worst = std::max(worst, std::abs(std::log(p / q)));
  }
  return worst;
}

double hockey_stick(const DiscreteDistribution& P,
                    const DiscreteDistribution& Q, double epsilon) {
  require_same_space(P, Q);
  const double scale = std::exp(epsilon);
  double sum = 0.0;
  for (std::size_t i = 0; i < P.masses.size(); ++i) {
    sum += std::max(0.0, P.masses[i] - scale * Q.masses[i]);
  }
  return sum;
}

bool check_indistinguishable(const DiscreteDistribution& P,
                             const DiscreteDistribution& Q, double epsilon,
                             double delta) {
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("check_indistinguishable: negative epsilon");
  }
  if (!(delta >= 0.0) || delta > 1.0) {
    throw std::domain_error("check_indistinguishable: delta outside [0, 1]");
  }
  const double tol = 1e-15;
  return hockey_stick(P, Q, epsilon) <= delta + tol &&
         hockey_stick(Q, P, epsilon) <= delta + tol;
}

MixtureDecomposition binary_decomposition(double pi0, double pi1,
                                          double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("binary_decomposition: epsilon must be positive");
  }
  if (!(pi0 >= 0.0) || pi0 > 1.0 || !(pi1 >= 0.0) || pi1 > 1.0) {
    throw std::domain_error("binary_decomposition: masses outside [0, 1]");
  }
  if (pi0 > pi1) {
    throw std::domain_error("binary_decomposition: requires pi0 <= pi1");
  }
  const DiscreteDistribution Z0 = DiscreteDistribution::bernoulli(pi0);
  const DiscreteDistribution Z1 = DiscreteDistribution::bernoulli(pi1);
  if (!check_indistinguishable(Z0, Z1, epsilon, 0.0)) {
    throw std::domain_error(
        "binary_decomposition: pair is not epsilon-indistinguishable");
  }

  const double e = std::exp(epsilon);
  MixtureDecomposition dec;
  dec.common = DiscreteDistribution::bernoulli(0.0);  // point mass on prior
  if (pi1 == 0.0) {
    // Degenerate: both point masses on the prior.
    dec.p = 1.0;
    dec.branch0 = DiscreteDistribution::bernoulli(1.0);
    dec.branch1 = dec.branch0;
    return dec;
  }
  dec.p = 1.0 - (pi1 * e - pi0) / (e - 1.0);
  const double b0 = (pi0 - pi0 / e) / (pi1 - pi0 / e);
  const double b1 = (e * pi1 - pi1) / (e * pi1 - pi0);
  dec.branch0 = DiscreteDistribution::bernoulli(std::min(1.0, b0));
  dec.branch1 = DiscreteDistribution::bernoulli(std::min(1.0, b1));
  return dec;
}

bool verify_decomposition(const MixtureDecomposition& dec,
                          const DiscreteDistribution& Z0,
                          const DiscreteDistribution& Z1,
                          const std::vector<std::size_t>& target,
                          double epsilon, double q, double recon_tol,
                          double div_slack) {
  require_same_space(Z0, Z1);
  dec.common.validate(1e-9);
  dec.branch0.validate(1e-9);
  dec.branch1.validate(1e-9);
  if (dec.p < 0.0 || dec.p > 1.0) return false;
  const std::size_t n = Z0.masses.size();
  const std::vector<bool> mask = target_mask(n, target);
  const double one_minus_delta = 1.0 - dec.delta;

  for (std::size_t i = 0; i < n; ++i) {
    double m0 = one_minus_delta * (dec.p * dec.common.masses[i] +
                                   (1.0 - dec.p) * dec.branch0.masses[i]);
    double m1 = one_minus_delta * (dec.p * dec.common.masses[i] +
                                   (1.0 - dec.p) * dec.branch1.masses[i]);
    if (dec.fail0) m0 += dec.delta * dec.fail0->masses[i];
    if (dec.fail1) m1 += dec.delta * dec.fail1->masses[i];
    if (std::abs(m0 - Z0.masses[i]) > recon_tol) return false;
    if (std::abs(m1 - Z1.masses[i]) > recon_tol) return false;
  }
  if (dec.p < 1.0) {
    if (exact_divergence(dec.branch0, dec.branch1) > epsilon + div_slack) {
      return false;
    }
  }
  const double q_tol = 1e-11;
  return target_mass(dec.branch0, mask) >= q - q_tol &&
         target_mass(dec.branch1, mask) >= q - q_tol;
}

std::optional<MixtureDecomposition> decomposition_search(
    const DiscreteDistribution& Z0, const DiscreteDistribution& Z1,
    const std::vector<std::size_t>& target, double epsilon, double delta,
    double q) {
  require_same_space(Z0, Z1);
  if (Z0.masses.size() > kMaxOutcomes) {
    throw std::invalid_argument(
        "decomposition_search: outcome space larger than 8");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("decomposition_search: epsilon must be positive");
  }
  if (!(delta >= 0.0) || delta >= 1.0) {
    throw std::domain_error("decomposition_search: delta must be in [0, 1)");
  }
  if (!(q > 0.0) || q > 1.0) {
    throw std::domain_error("decomposition_search: q must lie in (0, 1]");
  }

  // A pure witness works for any delta: failure parts equal to the inputs
  // leave the mixture identity intact.
  if (auto dec = search_pure(Z0, Z1, target, epsilon, q)) {
    if (delta > 0.0) {
      dec->delta = delta;
      dec->fail0 = Z0;
      dec->fail1 = Z1;
    }
    return dec;
  }
  if (delta == 0.0) return std::nullopt;

  // Canonical failure-part extraction: strip the hockey-stick excess from
  // each side, then search the pure remainder. The remainders are only
  // guaranteed epsilon-indistinguishable when the two excess masses agree;
  // the witness is re-verified, so a failed extraction degrades to
  // Infeasible rather than an unsound answer.
  const std::size_t n = Z0.masses.size();
  const double scale = std::exp(epsilon);
  std::vector<double> a(n), b(n);
  double A = 0.0, B = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::max(0.0, Z0.masses[i] - scale * Z1.masses[i]);
    b[i] = std::max(0.0, Z1.masses[i] - scale * Z0.masses[i]);
    A += a[i];
    B += b[i];
  }
  if (A > delta || B > delta) return std::nullopt;  // not (eps, delta)-close

  DiscreteDistribution N0{Z0.outcomes, {}}, N1{Z0.outcomes, {}};
  N0.masses.resize(n);
  N1.masses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    N0.masses[i] = (Z0.masses[i] - a[i]) / (1.0 - A);
    N1.masses[i] = (Z1.masses[i] - b[i]) / (1.0 - B);
  }
  auto inner = search_pure(N0, N1, target, epsilon, q);
  if (!inner) return std::nullopt;

  MixtureDecomposition dec = *inner;
  dec.delta = delta;
  DiscreteDistribution fail0{Z0.outcomes, std::vector<double>(n)};
  DiscreteDistribution fail1{Z0.outcomes, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    fail0.masses[i] = (a[i] + (delta - A) * N0.masses[i]) / delta;
    fail1.masses[i] = (b[i] + (delta - B) * N1.masses[i]) / delta;
  }
  dec.fail0 = std::move(fail0);
  dec.fail1 = std::move(fail1);
  if (!verify_decomposition(dec, Z0, Z1, target, epsilon, q)) {
    return std::nullopt;
  }
  return dec;
}

AuditResult mc_privacy_audit(const std::function<int(SplitMix64&)>& runner0,
                             const std::function<int(SplitMix64&)>& runner1,
                             int num_outcomes, long long trials,
                             std::uint64_t seed, double z) {
  if (!runner0 || !runner1) {
    throw std::invalid_argument("audit: runner is empty");
  }
  if (num_outcomes < 1) {
    throw std::domain_error("audit: need at least one outcome");
  }
  if (trials < 1) {
    throw std::domain_error("audit: trials must be positive");
  }

  std::vector<long long> c0(static_cast<std::size_t>(num_outcomes), 0);
  std::vector<long long> c1(static_cast<std::size_t>(num_outcomes), 0);
  for (long long t = 0; t < trials; ++t) {
    // Independent per-trial streams; trials may be distributed freely.
    SplitMix64 rng0 = derive_rng(seed, static_cast<std::uint64_t>(2 * t));
    SplitMix64 rng1 = derive_rng(seed, static_cast<std::uint64_t>(2 * t + 1));
    const int o0 = runner0(rng0);
    const int o1 = runner1(rng1);
    if (o0 < 0 || o0 >= num_outcomes || o1 < 0 || o1 >= num_outcomes) {
      throw std::invalid_argument("audit: runner produced an outcome index "
                                  "outside [0, num_outcomes)");
    }
    ++c0[static_cast<std::size_t>(o0)];
    ++c1[static_cast<std::size_t>(o1)];
  }

  AuditResult result;
  result.z = z;
  result.trials = trials;
  for (int i = 0; i < num_outcomes; ++i) {
    const std::size_t idx = static_cast<std::size_t>(i);
    AuditOutcome row;
    row.outcome = i;
    row.count0 = c0[idx];
    row.count1 = c1[idx];
    const double lo0 = wilson_lower(c0[idx], trials, z);
    const double hi0 = wilson_upper(c0[idx], trials, z);
    const double lo1 = wilson_lower(c1[idx], trials, z);
    const double hi1 = wilson_upper(c1[idx], trials, z);
    double bound = 0.0;
    if (lo0 > 0.0 && hi1 > 0.0) bound = std::max(bound, std::log(lo0 / hi1));
    if (lo1 > 0.0 && hi0 > 0.0) bound = std::max(bound, std::log(lo1 / hi0));
    row.log_ratio_lower = bound;
    result.epsilon_lower = std::max(result.epsilon_lower, bound);
    result.per_outcome.push_back(row);
  }
  return result;
}

}  // namespace tct
