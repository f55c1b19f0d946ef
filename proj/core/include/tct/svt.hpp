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
// Sparse vector with individual privacy charging: an adaptive stream of
// linear threshold queries where a positive answer publishes the noisy sum,
// only contributing items are charged, and an item retires once it has
// contributed to tau positive answers. Counter updates depend only on
// published results, which is verified after every query by replaying the
// public transcript.

#ifndef TCT_SVT_HPP_
#define TCT_SVT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tct/data.hpp"
#include "tct/mechanisms.hpp"
#include "tct/privacy.hpp"
#include "tct/rng.hpp"

namespace tct {

// Items are keyed by content hash; identical records share one entry with a
// multiplicity (their counters move in lockstep, so they retire together).
struct SvtItem {
  std::uint64_t identity = 0;
  std::size_t representative_row = 0;
  int multiplicity = 0;
  int counter = 0;
  bool active = true;
};

enum class SvtMode { kAbove, kBetween };

struct SvtHistoryEntry {
  SvtMode mode = SvtMode::kAbove;
  LinearQuery query;          // weight + threshold (above mode)
  double t_low = 0.0;         // between mode band
  double t_high = 0.0;
  OutcomeLabel published;
};

// Rebuilds the item table from public information only: the initial item
// list, the query definitions, and the published outcomes.
std::vector<SvtItem> svt_replay(const Dataset& data, int tau,
                                const std::vector<SvtHistoryEntry>& history);

class SvtSession {
 public:
  // max_queries is engine plumbing, not part of the charging scheme; 0 means
  // unlimited.
  SvtSession(const Dataset& data, int tau, double epsilon,
             std::size_t max_queries = 0);

  // Above-threshold query: publishes the noisy sum on Above, Bottom
  // otherwise. On Above every active item with positive weight is charged.
  OutcomeLabel query(const LinearQuery& query, SplitMix64& rng);

  // Band variant: contributors are charged on Between outcomes only.
  OutcomeLabel query_between(const LinearQuery& query, double t_low,
                             double t_high, SplitMix64& rng);

  // Per-item privacy bound: the hit budget is the per-item tau and the
  // charge rate is the smallest q any issued query declared.
  PrivacyParams report(double alpha,
                       std::optional<double> target_delta = std::nullopt) const;

  const std::vector<SvtItem>& items() const { return items_; }
  const std::vector<SvtHistoryEntry>& history() const { return history_; }
  int tau() const { return tau_; }
  double epsilon() const { return epsilon_; }
  double min_declared_q() const;

  // Active-item count (identities, not multiplicities).
  std::size_t active_items() const;

 private:
  OutcomeLabel run_query(SvtMode mode, const LinearQuery& query, double t_low,
                         double t_high, SplitMix64& rng);
  double active_sum(const LinearQuery& query) const;
  void charge_contributors(const LinearQuery& query);
  void check_replay() const;  // throws std::logic_error on divergence

  const Dataset* data_;
  int tau_;
  double epsilon_;
  std::size_t max_queries_;
  std::vector<SvtItem> items_;
  std::vector<SvtHistoryEntry> history_;
  double min_q_ = 1.0;
  bool any_query_ = false;
};

}  // namespace tct

#endif  // TCT_SVT_HPP_
