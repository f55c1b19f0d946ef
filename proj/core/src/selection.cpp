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

#include "tct/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tct/digest.hpp"

namespace tct {

namespace {

std::vector<bool> uniform_flags(const Session& session, bool hit) {
  return std::vector<bool>(
      static_cast<std::size_t>(session.config().num_targets), hit);
}

std::string winner_digest(const SelectionWinner& w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d|%.17g", w.index, w.score);
  return digest_of(std::string(buf) + "|" + w.solution);
}

double checked_uniform_epsilon(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) {
    throw std::domain_error("selection: candidate list is empty");
  }
  const double epsilon = candidates.front().privacy.epsilon;
  for (const Candidate& c : candidates) {
    c.privacy.validate();
    if (c.privacy.epsilon != epsilon) {
      throw std::domain_error(
          "selection: candidates must share one epsilon");
    }
    if (!c.sampler) {
      throw std::invalid_argument("selection: candidate has no sampler");
    }
  }
  return epsilon;
}

double total_delta(const std::vector<Candidate>& candidates) {
  double sum = 0.0;
  for (const Candidate& c : candidates) sum += c.privacy.delta;
  return sum;
}

// Atomic pre-flight for a selection that needs `hits_needed` hits and will
// register `sum_delta` of per-candidate deltas. A delta overflow halts the
// session (nothing is charged); a hit shortfall only rejects the call.
bool selection_preflight(Session& session, int hits_needed, double sum_delta,
                         double epsilon_per_hit) {
  if (session.status() != SessionStatus::kRunning) return false;
  if (hits_needed > session.hits_remaining()) return false;
  return session.precheck(epsilon_per_hit, sum_delta) ==
         RegisterResult::kAccepted;
}

void register_candidate_deltas(Session& session,
                               const std::vector<Candidate>& candidates,
                               std::string_view tag) {
  for (const Candidate& c : candidates) {
    if (c.privacy.delta > 0.0) {
      session.register_call(0.0, c.privacy.delta, uniform_flags(session, false),
                            std::string(tag) + ":delta", "");
    }
  }
}

std::vector<SelectionWinner> draw_all(const std::vector<Candidate>& candidates,
                                      SplitMix64& rng) {
  // One child stream per candidate so draws are order-free and reproducible.
  const std::uint64_t base = rng.next_u64();
  std::vector<SelectionWinner> draws;
  draws.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    SplitMix64 child = derive_rng(base, i);
    const CandidateDraw d = candidates[i].sampler(child);
    draws.push_back({candidates[i].index, candidates[i].name, d.solution,
                     d.score});
  }
  return draws;
}

}  // namespace

SelectionResult top_k_oneshot(Session& session,
                              const std::vector<Candidate>& candidates, int k,
                              SplitMix64& rng) {
  const double epsilon = checked_uniform_epsilon(candidates);
  const int m = static_cast<int>(candidates.size());
  if (k < 1 || k > m) {
    throw std::domain_error("top_k: k must lie in [1, m]");
  }
  SelectionResult result;
  result.epsilon_per_hit = 2.0 * epsilon;
  if (!selection_preflight(session, k, total_delta(candidates),
                           result.epsilon_per_hit)) {
    result.rejected = true;
    return result;
  }
  register_candidate_deltas(session, candidates, "top_k");

  std::vector<SelectionWinner> draws = draw_all(candidates, rng);
  std::stable_sort(draws.begin(), draws.end(),
                   [](const SelectionWinner& a, const SelectionWinner& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.index < b.index;
                   });
  draws.resize(static_cast<std::size_t>(k));
  result.winners = std::move(draws);
  result.hits_charged = k;
  for (const SelectionWinner& w : result.winners) {
    session.register_call(result.epsilon_per_hit, 0.0,
                          uniform_flags(session, true), "top_k:hit",
                          winner_digest(w));
  }
  return result;
}

SelectionResult above_threshold_release_all(
    Session& session, const std::vector<Candidate>& candidates,
    double threshold, SplitMix64& rng) {
  const double epsilon = checked_uniform_epsilon(candidates);
  SelectionResult result;
  result.epsilon_per_hit = epsilon;
  if (session.status() != SessionStatus::kRunning ||
      session.precheck(epsilon, total_delta(candidates)) !=
          RegisterResult::kAccepted) {
    result.rejected = true;
    return result;
  }

  CrStore store;
  const IntervalSet target({Interval::greater_than(threshold)});
  const std::uint64_t base = rng.next_u64();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    SplitMix64 child = derive_rng(base, i);
    CandidateDraw draw;  // one-shot: sampled inside the cr exactly once
    const CrOutcome out = store.cr(
        session, "atr:" + std::to_string(i),
        [&](SplitMix64& r) {
          draw = c.sampler(r);
          return draw.score;
        },
        c.privacy, target, child, "above_threshold_release");
    if (out.rejected()) break;  // session halted mid-batch
    if (out.published()) {
      result.winners.push_back({c.index, c.name, draw.solution, draw.score});
      ++result.hits_charged;
    }
  }
  return result;
}

StopRule stop_after_count(int k) {
  return [k](const SweepView& view) {
    return static_cast<int>(view.prefix->size()) >= k;
  };
}

StopRule stop_on_score_gap(double gap) {
  return [gap](const SweepView& view) {
    if (view.phase != SweepView::Phase::kAfterRound) return false;
    if (view.releases_this_round != 0 || view.prefix->empty()) return false;
    return view.prefix->back().score - view.current_threshold > gap;
  };
}

StopRule never_stop() {
  return [](const SweepView&) { return false; };
}

SelectionResult sweep_simulate(Session& session,
                               const std::vector<Candidate>& candidates,
                               const StopRule& stop_rule,
                               const std::vector<double>& score_grid,
                               SplitMix64& rng) {
  const double epsilon = checked_uniform_epsilon(candidates);
  if (score_grid.empty()) {
    throw std::domain_error("sweep: score grid is empty");
  }
  for (std::size_t j = 1; j < score_grid.size(); ++j) {
    if (!(score_grid[j] < score_grid[j - 1])) {
      throw std::domain_error("sweep: score grid must be strictly decreasing");
    }
  }
  if (!stop_rule) {
    throw std::invalid_argument("sweep: stop rule is empty");
  }

  SelectionResult result;
  result.epsilon_per_hit = 2.0 * epsilon;
  if (session.status() != SessionStatus::kRunning ||
      session.precheck(result.epsilon_per_hit, total_delta(candidates)) !=
          RegisterResult::kAccepted) {
    result.rejected = true;
    return result;
  }

  // Initial conditional releases with an empty target: the threshold starts
  // above everything, so nothing publishes yet and only deltas are charged.
  CrStore store;
  std::vector<std::string> solutions(candidates.size());
  const std::uint64_t base = rng.next_u64();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    SplitMix64 child = derive_rng(base, i);
    const CrOutcome out = store.cr(
        session, "swp:" + std::to_string(i),
        [&](SplitMix64& r) {
          CandidateDraw d = c.sampler(r);
          solutions[i] = d.solution;
          return d.score;
        },
        c.privacy, IntervalSet(), child, "sweep");
    if (out.rejected()) {
      result.rejected = true;
      return result;
    }
  }

  SweepView view;
  view.prefix = &result.winners;
  bool stopped = false;
  double prev_threshold = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < score_grid.size() && !stopped; ++j) {
    const double threshold = score_grid[j];
    // Extension [threshold, prev): lowering the threshold one grid step.
    Interval step = Interval::half_open(threshold, prev_threshold);
    if (j == 0) step.hi_strict = false;  // [g0, inf)
    const IntervalSet extension({step});
    view.current_threshold = threshold;
    view.releases_this_round = 0;

    for (std::size_t i = 0; i < candidates.size() && !stopped; ++i) {
      const PendingComputation* pc = store.find("swp:" + std::to_string(i));
      if (pc->released) continue;
      const CrOutcome out =
          store.revise(session, "swp:" + std::to_string(i), extension, "sweep");
      if (out.rejected()) return result;  // session halted; prefix stands
      if (out.published()) {
        result.winners.push_back({candidates[i].index, candidates[i].name,
                                  solutions[i], out.value});
        ++result.hits_charged;
        ++view.releases_this_round;
        view.phase = SweepView::Phase::kAfterRelease;
        stopped = stop_rule(view);
      }
    }
    if (!stopped) {
      view.phase = SweepView::Phase::kAfterRound;
      stopped = stop_rule(view);
    }
    prev_threshold = threshold;
  }
  return result;
}

}  // namespace tct
