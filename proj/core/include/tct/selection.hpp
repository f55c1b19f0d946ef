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
// One-shot private selection: every candidate runs exactly once, the top-k
// triplets are published, and the accountant receives exactly k hits at
// doubled epsilon. The sweep simulator expresses the same selection through
// conditional release with revisions; it exists for equivalence testing and
// for data-dependent stopping rules.

#ifndef TCT_SELECTION_HPP_
#define TCT_SELECTION_HPP_

#include <functional>
#include <string>
#include <vector>

#include "tct/accountant.hpp"
#include "tct/conditional_release.hpp"
#include "tct/rng.hpp"

namespace tct {

struct CandidateDraw {
  double score = 0.0;
  std::string solution;
};

struct Candidate {
  int index = 0;
  std::string name;
  std::function<CandidateDraw(SplitMix64&)> sampler;
  PrivacyParams privacy;  // epsilon must be uniform across one selection
};

struct SelectionWinner {
  int index = 0;
  std::string name;
  std::string solution;
  double score = 0.0;
};

struct SelectionResult {
  std::vector<SelectionWinner> winners;  // decreasing score, ties by index
  int hits_charged = 0;
  double epsilon_per_hit = 0.0;
  bool rejected = false;  // budget pre-flight failed; nothing was sampled
};

// Runs each candidate once and publishes the k highest-score triplets.
// Pre-flight: k hits must remain in the session budget and the candidates'
// summed deltas must fit the delta budget, otherwise the whole call is
// rejected atomically before any mechanism runs. Deltas are registered for
// all m candidates regardless of who wins; each winner is a hit at 2 epsilon.
SelectionResult top_k_oneshot(Session& session,
                              const std::vector<Candidate>& candidates, int k,
                              SplitMix64& rng);

// Releases every candidate whose score exceeds the threshold (strictly).
// One conditional release per candidate; each release is one hit at the
// base epsilon, with no revisions and hence no doubling.
SelectionResult above_threshold_release_all(
    Session& session, const std::vector<Candidate>& candidates,
    double threshold, SplitMix64& rng);

// Observed state a stop rule may consult. The rule fires between releases
// (kAfterRelease) and after every completed grid round (kAfterRound); a rule
// returns true to stop the sweep.
struct SweepView {
  enum class Phase { kAfterRelease, kAfterRound };
  Phase phase = Phase::kAfterRelease;
  const std::vector<SelectionWinner>* prefix = nullptr;
  double current_threshold = 0.0;
  int releases_this_round = 0;
};
using StopRule = std::function<bool(const SweepView&)>;

// Simulates the selection as a threshold sweep: one conditional release per
// candidate with an initially empty target (threshold at infinity), then
// rounds of revisions stepping down the score grid, candidates scanned in
// ascending index within a round. Results release in decreasing score order
// (grid-resolution ties by index); every release is a hit at 2 epsilon.
SelectionResult sweep_simulate(Session& session,
                               const std::vector<Candidate>& candidates,
                               const StopRule& stop_rule,
                               const std::vector<double>& score_grid,
                               SplitMix64& rng);

// Stop after exactly k releases.
StopRule stop_after_count(int k);
// Stop once a completed round releases nothing, the prefix is nonempty, and
// the score drop from the last release to the current threshold exceeds gap.
StopRule stop_on_score_gap(double gap);
StopRule never_stop();

}  // namespace tct

#endif  // TCT_SELECTION_HPP_
