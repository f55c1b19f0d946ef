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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tct/accountant.hpp"
#include "tct/rng.hpp"

using namespace tct;

namespace {

SessionConfig base_config() {
  SessionConfig c;
  c.tau = 2;
  c.tau_delta = 1e-5;
  c.q = 0.5;
  c.epsilon = 0.1;
  c.num_targets = 1;
  c.alpha = 1.0;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("session opens with zeroed state") {
  SessionConfig c = base_config();
  c.tau = 5;
  Session s(c);
  CHECK(s.counters() == std::vector<int>{0});
  CHECK(s.status() == SessionStatus::kRunning);
  CHECK(s.c_delta() == 0.0);
  CHECK(s.ledger().empty());

  c.num_targets = 3;
  Session s3(c);
  CHECK(s3.counters() == std::vector<int>{0, 0, 0});

  c.tau = 0;
  CHECK_THROWS_AS(Session{c}, std::invalid_argument);
}

TEST_CASE("halts exactly at the tau-th hit, publish-then-halt") {
  SessionConfig c = base_config();
  Session s(c);
  for (int call = 1; call <= 10; ++call) {
    const bool hit = call == 3 || call == 9;
    const RegisterResult r = s.register_call(0.1, 0.0, {hit}, "t");
    if (call < 9) {
      CHECK(r == RegisterResult::kAccepted);
    } else if (call == 9) {
      CHECK(r == RegisterResult::kAcceptedAndHalted);
      CHECK(s.status() == SessionStatus::kHaltedHits);
      // The halting call itself is on the ledger.
      CHECK(s.ledger().size() == 9);
    } else {
      CHECK(r == RegisterResult::kRejectedAlreadyHalted);
      CHECK(s.ledger().size() == 9);
    }
  }
  CHECK(s.counters() == std::vector<int>{2});
}

TEST_CASE("delta budget rejects before charging") {
  SessionConfig c = base_config();
  c.tau_delta = 1e-6;
  Session s(c);
  CHECK(s.register_call(0.1, 6e-7, {false}) == RegisterResult::kAccepted);
  CHECK(s.c_delta() == doctest::Approx(6e-7));

  const std::size_t ledger_before = s.ledger().size();
  CHECK(s.register_call(0.1, 6e-7, {true}) ==
        RegisterResult::kRejectedDeltaBudget);
  CHECK(s.status() == SessionStatus::kHaltedDeltaBudget);
  // Nothing changed except the halt status.
  CHECK(s.c_delta() == doctest::Approx(6e-7));
  CHECK(s.counters() == std::vector<int>{0});
  CHECK(s.ledger().size() == ledger_before);
}

TEST_CASE("multi-target halting uses the minimum counter") {
  SessionConfig c = base_config();
  c.tau = 1;
  c.num_targets = 2;
  Session s(c);
  CHECK(s.register_call(0.1, 0.0, {true, false}) ==
        RegisterResult::kAccepted);
  CHECK(s.counters() == std::vector<int>{1, 0});
  CHECK(s.status() == SessionStatus::kRunning);
  CHECK(s.register_call(0.1, 0.0, {false, true}) ==
        RegisterResult::kAcceptedAndHalted);
  CHECK(s.status() == SessionStatus::kHaltedHits);
}

TEST_CASE("epsilon cap admits 2x and rejects above") {
  Session s(base_config());
  CHECK(s.register_call(0.2, 0.0, {false}) == RegisterResult::kAccepted);
  CHECK(s.register_call(0.2000001, 0.0, {true}) ==
        RegisterResult::kRejectedEpsilonCap);
  CHECK(s.status() == SessionStatus::kRunning);
  CHECK(s.counters() == std::vector<int>{0});
  CHECK(s.ledger().size() == 1);
}

TEST_CASE("hit flag length is a contract error") {
  Session s(base_config());
  CHECK_THROWS_AS(s.register_call(0.1, 0.0, {true, false}),
                  std::invalid_argument);
}

TEST_CASE("report delegates to the closed-form bound") {
  SessionConfig c = base_config();
  c.tau = 20;
  c.q = 0.5;
  c.epsilon = 0.05;
  Session s(c);
  const PrivacyParams fresh = s.report();
  TailParams tail{20, 1.0, c.tau_delta};
  const PrivacyParams want = tct_bound(tail, 0.05, 0.5, 0.0);
  CHECK(fresh.epsilon == want.epsilon);
  CHECK(fresh.delta == want.delta);

  // Accumulated delta enters additively.
  s.register_call(0.05, 1e-7, {false});
  const PrivacyParams mid = s.report();
  CHECK(mid.delta == doctest::Approx(want.delta + 1e-7).epsilon(1e-12));
  CHECK(mid.epsilon == want.epsilon);
}

TEST_CASE("two targets double the delta component but not c_delta") {
  SessionConfig c1 = base_config();
  c1.tau = 10;
  c1.tau_delta = 1e-4;
  SessionConfig c2 = c1;
  c2.num_targets = 2;
  Session s1(c1), s2(c2);
  s1.register_call(0.1, 1e-6, {false});
  s2.register_call(0.1, 1e-6, {false, false});

  const PrivacyParams r1 = s1.report();
  const PrivacyParams r2 = s2.report();
  CHECK(r2.epsilon == r1.epsilon);
  const double part1 = r1.delta - 1e-6;
  CHECK(r2.delta == doctest::Approx(2.0 * part1 + 1e-6).epsilon(1e-12));
}

TEST_CASE("report ignores non-hit call volume") {
  SessionConfig c = base_config();
  c.tau = 5;
  Session a(c), b(c);
  a.register_call(0.1, 0.0, {true});
  b.register_call(0.1, 0.0, {true});
  for (int i = 0; i < 500; ++i) b.register_call(0.1, 0.0, {false});
  CHECK(a.report().epsilon == b.report().epsilon);
  CHECK(a.report().delta == b.report().delta);
}

TEST_CASE("property: random hit sequences halt exactly at the budget") {
  SplitMix64 gen(0xACC0);
  for (int trial = 0; trial < 1000; ++trial) {
    SessionConfig c = base_config();
    c.tau = 1 + static_cast<int>(gen.next_u64() % 6);
    c.num_targets = 1 + static_cast<int>(gen.next_u64() % 3);
    c.tau_delta = 1e-3;
    Session s(c);

    std::vector<int> mirror(static_cast<std::size_t>(c.num_targets), 0);
    bool halted = false;
    const int calls = 1 + static_cast<int>(gen.next_u64() % 40);
    for (int i = 0; i < calls; ++i) {
      std::vector<bool> flags;
      for (int t = 0; t < c.num_targets; ++t) {
        flags.push_back(gen.next_bernoulli(0.35));
      }
      const double delta = gen.next_bernoulli(0.3) ? 1e-6 : 0.0;
      const RegisterResult r = s.register_call(0.1, delta, flags);
      if (halted) {
        CHECK(r == RegisterResult::kRejectedAlreadyHalted);
        continue;
      }
      REQUIRE(r != RegisterResult::kRejectedDeltaBudget);  // budget is ample
      for (int t = 0; t < c.num_targets; ++t) {
        if (flags[static_cast<std::size_t>(t)]) {
          ++mirror[static_cast<std::size_t>(t)];
        }
      }
      const int min_counter =
          *std::min_element(mirror.begin(), mirror.end());
      if (min_counter >= c.tau) {
        CHECK(r == RegisterResult::kAcceptedAndHalted);
        halted = true;
      } else {
        CHECK(r == RegisterResult::kAccepted);
      }
      CHECK(s.counters() == mirror);
    }

    // Replay determinism: the ledger alone reproduces the state.
    const LedgerReplay replay = replay_ledger(s.ledger(), c.num_targets);
    CHECK(replay.counters == s.counters());
    CHECK(replay.c_delta == doctest::Approx(s.c_delta()).epsilon(1e-15));

    // Hit bookkeeping: accepted hit flags count exactly the counters.
    std::vector<int> from_ledger(static_cast<std::size_t>(c.num_targets), 0);
    for (const CallRecord& rec : s.ledger()) {
      for (int t = 0; t < c.num_targets; ++t) {
        if (rec.hit_flags[static_cast<std::size_t>(t)]) {
          ++from_ledger[static_cast<std::size_t>(t)];
        }
      }
    }
    CHECK(from_ledger == s.counters());
  }
}

TEST_CASE("property: no ledger record follows a halting record") {
  SplitMix64 gen(0xACC1);
  for (int trial = 0; trial < 200; ++trial) {
    SessionConfig c = base_config();
    c.tau = 1 + static_cast<int>(gen.next_u64() % 4);
    Session s(c);
    for (int i = 0; i < 50; ++i) {
      s.register_call(0.1, 0.0, {gen.next_bernoulli(0.4)});
    }
    int running = 0;
    for (std::size_t i = 0; i < s.ledger().size(); ++i) {
      if (s.ledger()[i].hit_flags[0]) ++running;
      if (running >= c.tau) {
        CHECK(i + 1 == s.ledger().size());
      }
    }
  }
}

TEST_CASE("precheck does not charge but a delta failure halts") {
  SessionConfig c = base_config();
  c.tau_delta = 1e-7;
  Session s(c);
  CHECK(s.precheck(0.1, 0.0) == RegisterResult::kAccepted);
  CHECK(s.precheck(0.3, 0.0) == RegisterResult::kRejectedEpsilonCap);
  CHECK(s.status() == SessionStatus::kRunning);
  CHECK(s.precheck(0.1, 1e-6) == RegisterResult::kRejectedDeltaBudget);
  CHECK(s.status() == SessionStatus::kHaltedDeltaBudget);
  CHECK(s.c_delta() == 0.0);
  CHECK(s.ledger().empty());
}
