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
// The target-charging session state machine: registers each private call
// with its target outcome, advances hit counters, enforces the hit budget
// tau and the cumulative-delta budget tau_delta, and renders privacy
// reports. Single writer per session; calls are totally ordered.

#ifndef TCT_ACCOUNTANT_HPP_
#define TCT_ACCOUNTANT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tct/privacy.hpp"

namespace tct {

struct SessionConfig {
  int tau = 1;             // target-hit budget, >= 1
  double tau_delta = 0.0;  // cumulative per-call delta budget
  double q = 0.5;          // session-wide per-hit charge rate, in (0, 1]
  double epsilon = 0.1;    // per-call epsilon; calls may declare up to 2x
  int num_targets = 1;     // k counters; halt when the minimum reaches tau
  double alpha = 1.0;      // report slack factor
  std::uint64_t seed = 0;

  void validate() const;
};

enum class SessionStatus { kRunning, kHaltedHits, kHaltedDeltaBudget };

enum class RegisterResult {
  kAccepted,
  kAcceptedAndHalted,
  kRejectedDeltaBudget,
  kRejectedAlreadyHalted,
  kRejectedEpsilonCap,
};

struct CallRecord {
  int call_id = 0;
  double epsilon_charged = 0.0;
  double delta_charged = 0.0;
  std::vector<bool> hit_flags;
  std::string mechanism_tag;
  std::string published_digest;  // hash only; the accountant never sees data
};

class Session {
 public:
  explicit Session(SessionConfig config);

  // The single mutating operation. The triggering call of a tau-th hit is
  // processed and its output published before the session halts
  // (publish-then-halt). A delta-budget failure rejects before anything is
  // charged and permanently halts the session.
  RegisterResult register_call(double epsilon, double delta,
                               const std::vector<bool>& hit_flags,
                               std::string_view mechanism_tag = "",
                               std::string_view published_digest = "");

  // Non-mutating look-ahead so mechanism drivers can refuse to sample when
  // the call could not be accepted. Does not charge and does not append to
  // the ledger, but a delta-budget failure halts the session (the check is
  // what ends the interaction, whether or not the mechanism ran).
  RegisterResult precheck(double epsilon, double delta);

  // Current end-to-end privacy bound, valid mid-session: the full budget tau
  // is the hit count the bound is stated for. With k > 1 targets the delta
  // component other than c_delta is multiplied by k.
  PrivacyParams report(std::optional<double> target_delta = std::nullopt) const;

  const SessionConfig& config() const { return config_; }
  SessionStatus status() const { return status_; }
  const std::vector<int>& counters() const { return counters_; }
  int min_counter() const;
  double c_delta() const { return c_delta_; }
  const std::vector<CallRecord>& ledger() const { return ledger_; }
  int hits_remaining() const { return config_.tau - min_counter(); }

 private:
  bool epsilon_within_cap(double epsilon) const;

  SessionConfig config_;
  std::vector<int> counters_;
  double c_delta_ = 0.0;
  SessionStatus status_ = SessionStatus::kRunning;
  std::vector<CallRecord> ledger_;
};

// Recompute counters and c_delta from ledger records alone; the pair must
// reproduce the live session state exactly (replay determinism).
struct LedgerReplay {
  std::vector<int> counters;
  double c_delta = 0.0;
};
LedgerReplay replay_ledger(const std::vector<CallRecord>& ledger,
                           int num_targets);

}  // namespace tct

#endif  // TCT_ACCOUNTANT_HPP_
