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
// Conditional release: run a private mechanism once, publish its result only
// if it lands in a declared target, and support later disjoint target
// extensions that may retroactively release the stored result at a doubled
// epsilon charge. Stored results live in memory only; unpublished values are
// never persisted.

#ifndef TCT_CONDITIONAL_RELEASE_HPP_
#define TCT_CONDITIONAL_RELEASE_HPP_

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tct/accountant.hpp"
#include "tct/rng.hpp"

namespace tct {

// Real interval with independently strict endpoints.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_strict = false;
  bool hi_strict = false;

  bool contains(double x) const {
    const bool above_lo = lo_strict ? x > lo : x >= lo;
    const bool below_hi = hi_strict ? x < hi : x <= hi;
    return above_lo && below_hi;
  }
  bool empty() const {
    return lo > hi || (lo == hi && (lo_strict || hi_strict));
  }
  bool overlaps(const Interval& other) const;

  static Interval at_least(double t) {  // [t, +inf)
    return {t, std::numeric_limits<double>::infinity(), false, false};
  }
  static Interval greater_than(double t) {  // (t, +inf)
    return {t, std::numeric_limits<double>::infinity(), true, false};
  }
  static Interval half_open(double lo, double hi) {  // [lo, hi)
    return {lo, hi, false, true};
  }
};

// Union of intervals; the target form the engine exposes. Disjointness of
// extensions is decidable structurally here, which is what makes revisions
// checkable without sampling.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> parts);

  bool contains(double x) const;
  bool disjoint_from(const IntervalSet& other) const;
  // Throws std::invalid_argument if the extension overlaps this set.
  void extend_with(const IntervalSet& extension);
  bool is_empty() const;
  const std::vector<Interval>& parts() const { return parts_; }

 private:
  std::vector<Interval> parts_;
};

struct PendingComputation {
  std::string id;
  double stored_result = 0.0;  // the single sample; never redrawn
  IntervalSet current_target;  // grows by disjoint extensions only
  double base_epsilon = 0.0;
  double base_delta = 0.0;
  bool released = false;
};

struct CrOutcome {
  enum class Status { kPublished, kBottom, kRejected };
  Status status = Status::kBottom;
  double value = 0.0;  // meaningful when published
  bool hit = false;

  bool published() const { return status == Status::kPublished; }
  bool rejected() const { return status == Status::kRejected; }
};

// Session-local store of pending computations.
class CrStore {
 public:
  // Initial conditional-release call. Charges the mechanism's delta up
  // front (before sampling; a delta-budget failure rejects without
  // sampling), draws once, publishes iff the draw is in the target. A hit is
  // registered at base_epsilon. Duplicate ids are a contract error.
  CrOutcome cr(Session& session, const std::string& id,
               const std::function<double(SplitMix64&)>& mechanism,
               PrivacyParams mechanism_privacy, const IntervalSet& target,
               SplitMix64& rng, std::string_view tag = "cr");

  // Target revision: publishes the stored result iff it lies in the
  // (disjoint) extension, charging a hit at 2 * base_epsilon. The current
  // target grows by the extension either way. Revising a released or
  // unknown id is rejected / a contract error respectively.
  CrOutcome revise(Session& session, const std::string& id,
                   const IntervalSet& extension, std::string_view tag = "revise");

  const PendingComputation* find(const std::string& id) const;
  std::size_t size() const { return pending_.size(); }

 private:
  std::map<std::string, PendingComputation> pending_;
};

}  // namespace tct

#endif  // TCT_CONDITIONAL_RELEASE_HPP_
