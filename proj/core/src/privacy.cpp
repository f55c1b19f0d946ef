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

#include "tct/privacy.hpp"

#include <cmath>

namespace tct {

double not_prior_q(double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("not_prior_q: epsilon must be nonnegative");
  }
  // 1 / (e^eps + 1) written as e^{-eps} / (1 + e^{-eps}); never overflows.
  const double t = std::exp(-epsilon);
  return t / (1.0 + t);
}

double between_q(double epsilon, double gap) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("between_q: epsilon must be positive");
  }
  if (!(gap >= 0.0)) {
    throw std::domain_error("between_q: gap must be nonnegative");
  }
  // (1 - e^{-gap eps}) * (e^eps - 1) / (e^{2 eps} - 1); the second factor
  // equals 1 / (e^eps + 1) exactly, evaluated here via expm1 for small eps.
  const double band = -std::expm1(-gap * epsilon);
  return band * std::expm1(epsilon) / std::expm1(2.0 * epsilon);
}

double wrapper_privacy(double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("wrapper_privacy: epsilon must be nonnegative");
  }
  return (4.0 / 3.0) * epsilon;
}

double boundary_q(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("boundary_q: epsilon must be positive");
  }
  const double t = wrapper_privacy(epsilon);
  return std::expm1(t) / (2.0 * std::expm1(epsilon + t));
}

double run_twice_q(double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("run_twice_q: epsilon must be nonnegative");
  }
  // 1 - sqrt(e^{2eps} / (1 + e^{2eps})) = 1 - 1 / sqrt(1 + e^{-2eps}).
  return 1.0 - 1.0 / std::sqrt(1.0 + std::exp(-2.0 * epsilon));
}

PrivacyParams basic_composition(int count, double epsilon) {
  if (count < 0) {
    throw std::domain_error("basic_composition: count must be nonnegative");
  }
  if (!(epsilon >= 0.0)) {
    throw std::domain_error("basic_composition: epsilon must be nonnegative");
  }
  return {static_cast<double>(count) * epsilon, 0.0};
}

PrivacyParams advanced_composition(int count, double epsilon, double delta) {
  if (count < 0) {
    throw std::domain_error("advanced_composition: count must be nonnegative");
  }
  if (!(epsilon >= 0.0)) {
    throw std::domain_error(
        "advanced_composition: epsilon must be nonnegative");
  }
  if (!(delta > 0.0) || delta >= 1.0) {
    throw std::domain_error("advanced_composition: delta must be in (0, 1)");
  }
  const double r = static_cast<double>(count);
  const double eps_prime =
      0.5 * r * epsilon * epsilon +
      epsilon * std::sqrt(2.0 * r * std::log(1.0 / delta));
  return {eps_prime, delta};
}

double delta_star(int tau, double alpha) {
  if (tau < 1) throw std::domain_error("delta_star: tau must be at least 1");
  if (!(alpha > 0.0)) {
    throw std::domain_error("delta_star: alpha must be positive");
  }
  return std::exp(-alpha * alpha * static_cast<double>(tau) /
                  (2.0 * (1.0 + alpha)));
}

double min_tau_constant(double alpha, ChernoffForm form) {
  if (!(alpha > 0.0)) {
    throw std::domain_error("min_tau_constant: alpha must be positive");
  }
  if (form == ChernoffForm::kSimplified) {
    return 2.0 * (1.0 + alpha) / (alpha * alpha);
  }
  // Raw multiplicative Chernoff: the bound (e^{-b} / (1-b)^{1-b})^mu with
  // b = alpha/(1+alpha) and mu = (1+alpha) tau collapses to
  // e^{-tau (alpha - ln(1+alpha))}.
  return 1.0 / (alpha - std::log1p(alpha));
}

int min_tau(double alpha, double delta_star, ChernoffForm form) {
  if (!(delta_star > 0.0) || delta_star >= 1.0) {
    throw std::domain_error("min_tau: delta_star must be in (0, 1)");
  }
  const double bound =
      min_tau_constant(alpha, form) * std::log(1.0 / delta_star);
  const double ceiled = std::ceil(bound);
  if (ceiled < 1.0) return 1;
  return static_cast<int>(ceiled);
}

PrivacyParams tct_bound(const TailParams& tail, double epsilon, double q,
                        double c_delta, std::optional<double> target_delta) {
  tail.validate();
  if (std::isnan(epsilon) || epsilon < 0.0) {
    throw std::domain_error("tct_bound: epsilon must be nonnegative");
  }
  if (!(q > 0.0) || q > 1.0) {
    throw std::domain_error("tct_bound: q must lie in (0, 1]");
  }
  if (!(c_delta >= 0.0)) {
    throw std::domain_error("tct_bound: c_delta must be nonnegative");
  }
  const double tail_delta = delta_star(tail.tau, tail.alpha);
  const double calls = (1.0 + tail.alpha) * static_cast<double>(tail.tau) / q;
  if (!target_delta.has_value()) {
    return {calls * epsilon, c_delta + tail_delta};
  }
  const double d = *target_delta;
  if (!(d > 0.0) || d >= 1.0) {
    throw std::domain_error("tct_bound: target_delta must be in (0, 1)");
  }
  const double eps_prime = 0.5 * calls * epsilon * epsilon +
                           epsilon * std::sqrt(calls * std::log(1.0 / d));
  return {eps_prime, d + c_delta + tail_delta};
}

}  // namespace tct
