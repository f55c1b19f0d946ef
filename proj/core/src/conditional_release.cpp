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

#include "tct/conditional_release.hpp"

#include <cstdio>
#include <stdexcept>

#include "tct/digest.hpp"

namespace tct {

namespace {

std::vector<bool> uniform_flags(const Session& session, bool hit) {
  return std::vector<bool>(
      static_cast<std::size_t>(session.config().num_targets), hit);
}

std::string value_digest(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return digest_of(buf);
}

}  // namespace

bool Interval::overlaps(const Interval& other) const {
  if (empty() || other.empty()) return false;
  if (hi < other.lo || other.hi < lo) return false;
  if (hi == other.lo) return !hi_strict && !other.lo_strict;
  if (other.hi == lo) return !other.hi_strict && !lo_strict;
  return true;
}

IntervalSet::IntervalSet(std::vector<Interval> parts)
    : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    for (std::size_t j = i + 1; j < parts_.size(); ++j) {
      if (parts_[i].overlaps(parts_[j])) {
        throw std::invalid_argument("interval set: parts must be disjoint");
      }
    }
  }
}

bool IntervalSet::contains(double x) const {
  for (const Interval& iv : parts_) {
    if (iv.contains(x)) return true;
  }
  return false;
}

bool IntervalSet::disjoint_from(const IntervalSet& other) const {
  for (const Interval& a : parts_) {
    for (const Interval& b : other.parts_) {
      if (a.overlaps(b)) return false;
    }
  }
  return true;
}

void IntervalSet::extend_with(const IntervalSet& extension) {
  if (!disjoint_from(extension)) {
    throw std::invalid_argument(
        "interval set: extension overlaps the current target");
  }
  for (const Interval& iv : extension.parts()) parts_.push_back(iv);
}

bool IntervalSet::is_empty() const {
  for (const Interval& iv : parts_) {
    if (!iv.empty()) return false;
  }
  return true;
}

CrOutcome CrStore::cr(Session& session, const std::string& id,
                      const std::function<double(SplitMix64&)>& mechanism,
                      PrivacyParams mechanism_privacy, const IntervalSet& target,
                      SplitMix64& rng, std::string_view tag) {
  mechanism_privacy.validate();
  if (pending_.count(id) != 0) {
    throw std::invalid_argument("cr: duplicate computation id '" + id + "'");
  }
  if (!mechanism) {
    throw std::invalid_argument("cr: mechanism is empty");
  }

  // The delta charge is unconditional and happens before the draw, so a
  // delta-budget halt never samples the mechanism.
  if (mechanism_privacy.delta > 0.0) {
    const RegisterResult res = session.register_call(
        0.0, mechanism_privacy.delta, uniform_flags(session, false),
        std::string(tag) + ":delta", "");
    if (res != RegisterResult::kAccepted) {
      return {CrOutcome::Status::kRejected, 0.0, false};
    }
  } else if (session.precheck(mechanism_privacy.epsilon, 0.0) !=
             RegisterResult::kAccepted) {
    return {CrOutcome::Status::kRejected, 0.0, false};
  }

  PendingComputation pc;
  pc.id = id;
  pc.stored_result = mechanism(rng);
  pc.current_target = target;
  pc.base_epsilon = mechanism_privacy.epsilon;
  pc.base_delta = mechanism_privacy.delta;

  CrOutcome out;
  if (target.contains(pc.stored_result)) {
    pc.released = true;
    out.status = CrOutcome::Status::kPublished;
    out.value = pc.stored_result;
    out.hit = true;
    session.register_call(pc.base_epsilon, 0.0, uniform_flags(session, true),
                          tag, value_digest(out.value));
  } else {
    out.status = CrOutcome::Status::kBottom;
  }
  pending_.emplace(id, std::move(pc));
  return out;
}

CrOutcome CrStore::revise(Session& session, const std::string& id,
                          const IntervalSet& extension, std::string_view tag) {
  auto it = pending_.find(id);
  if (it == pending_.end()) {
    throw std::invalid_argument("revise: unknown computation id '" + id + "'");
  }
  PendingComputation& pc = it->second;
  if (pc.released) {
    return {CrOutcome::Status::kRejected, 0.0, false};
  }
  if (!pc.current_target.disjoint_from(extension)) {
    throw std::invalid_argument(
        "revise: extension overlaps the current target of '" + id + "'");
  }
  const double revise_epsilon = 2.0 * pc.base_epsilon;
  if (session.precheck(revise_epsilon, 0.0) != RegisterResult::kAccepted) {
    return {CrOutcome::Status::kRejected, 0.0, false};
  }

  CrOutcome out;
  if (extension.contains(pc.stored_result)) {
    pc.released = true;
    out.status = CrOutcome::Status::kPublished;
    out.value = pc.stored_result;
    out.hit = true;
    session.register_call(revise_epsilon, 0.0, uniform_flags(session, true),
                          tag, value_digest(out.value));
  } else {
    out.status = CrOutcome::Status::kBottom;
  }
  pc.current_target.extend_with(extension);
  return out;
}

const PendingComputation* CrStore::find(const std::string& id) const {
  auto it = pending_.find(id);
  return it == pending_.end() ? nullptr : &it->second;
}

}  // namespace tct
