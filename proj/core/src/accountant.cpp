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

#include "tct/accountant.hpp"

#include <algorithm>
#include <stdexcept>

namespace tct {

void SessionConfig::validate() const {
  if (tau < 1) throw std::invalid_argument("session: tau must be at least 1");
  if (!(tau_delta >= 0.0)) {
    throw std::invalid_argument("session: tau_delta must be nonnegative");
  }
  if (!(q > 0.0) || q > 1.0) {
    throw std::invalid_argument("session: q must lie in (0, 1]");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("session: epsilon must be positive");
  }
  if (num_targets < 1) {
    throw std::invalid_argument("session: num_targets must be at least 1");
  }
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("session: alpha must be positive");
  }
}

Session::Session(SessionConfig config) : config_(config) {
  config_.validate();
  counters_.assign(static_cast<std::size_t>(config_.num_targets), 0);
}

int Session::min_counter() const {
  return *std::min_element(counters_.begin(), counters_.end());
}

bool Session::epsilon_within_cap(double epsilon) const {
  // Allow 2x the session epsilon (revise calls and selections charge 2x),
  // with a hair of float slack so 2 * eps passes exactly.
  return epsilon <= 2.0 * config_.epsilon * (1.0 + 1e-12);
}

RegisterResult Session::precheck(double epsilon, double delta) {
  if (!(epsilon >= 0.0) || !(delta >= 0.0)) {
    throw std::invalid_argument("session: negative epsilon or delta");
  }
  if (status_ != SessionStatus::kRunning) {
    return RegisterResult::kRejectedAlreadyHalted;
  }
  if (!epsilon_within_cap(epsilon)) {
    return RegisterResult::kRejectedEpsilonCap;
  }
  if (c_delta_ + delta > config_.tau_delta) {
    status_ = SessionStatus::kHaltedDeltaBudget;
    return RegisterResult::kRejectedDeltaBudget;
  }
  return RegisterResult::kAccepted;
}

RegisterResult Session::register_call(double epsilon, double delta,
                                      const std::vector<bool>& hit_flags,
                                      std::string_view mechanism_tag,
                                      std::string_view published_digest) {
  if (hit_flags.size() != counters_.size()) {
    throw std::invalid_argument(
        "session: hit_flags length does not match num_targets");
  }
  const RegisterResult pre = precheck(epsilon, delta);
  if (pre != RegisterResult::kAccepted) return pre;

  c_delta_ += delta;
  for (std::size_t i = 0; i < counters_.size(); ++i) {
    if (hit_flags[i]) ++counters_[i];
  }
  CallRecord rec;
  rec.call_id = static_cast<int>(ledger_.size());
  rec.epsilon_charged = epsilon;
  rec.delta_charged = delta;
  rec.hit_flags = hit_flags;
  rec.mechanism_tag = std::string(mechanism_tag);
  rec.published_digest = std::string(published_digest);
  ledger_.push_back(std::move(rec));

  if (min_counter() >= config_.tau) {
    status_ = SessionStatus::kHaltedHits;
    return RegisterResult::kAcceptedAndHalted;
  }
  return RegisterResult::kAccepted;
}

PrivacyParams Session::report(std::optional<double> target_delta) const {
  TailParams tail{config_.tau, config_.alpha, config_.tau_delta};
  PrivacyParams bound =
      tct_bound(tail, config_.epsilon, config_.q, c_delta_, target_delta);
  if (config_.num_targets > 1) {
    // k targets multiply the delta component of the single-target bound;
    // the accumulated per-call deltas are charged once.
    const double single_delta = bound.delta - c_delta_;
    bound.delta = static_cast<double>(config_.num_targets) * single_delta +
                  c_delta_;
  }
  return bound;
}

LedgerReplay replay_ledger(const std::vector<CallRecord>& ledger,
                           int num_targets) {
  LedgerReplay replay;
  replay.counters.assign(static_cast<std::size_t>(num_targets), 0);
  for (const CallRecord& rec : ledger) {
    replay.c_delta += rec.delta_charged;
    for (std::size_t i = 0; i < rec.hit_flags.size(); ++i) {
      if (rec.hit_flags[i]) ++replay.counters[i];
    }
  }
  return replay;
}

}  // namespace tct
