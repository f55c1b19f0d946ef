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

#include "tct/svt.hpp"

#include <algorithm>
#include <stdexcept>

namespace tct {

namespace {

std::vector<SvtItem> build_items(const Dataset& data) {
  std::map<std::uint64_t, SvtItem> by_identity;
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const std::uint64_t id = data.row_content_hash(r);
    auto [it, inserted] = by_identity.try_emplace(
        id, SvtItem{id, r, 0, 0, true});
    ++it->second.multiplicity;
  }
  std::vector<SvtItem> items;
  items.reserve(by_identity.size());
  for (auto& [id, item] : by_identity) items.push_back(item);
  return items;
}

double item_weight(const Dataset& data, const LinearQuery& query,
                   const SvtItem& item) {
  const double w = query.weight(data, item.representative_row);
  if (!(w >= 0.0) || w > 1.0) {
    throw std::invalid_argument("svt: query weight outside [0, 1]");
  }
  return w;
}

bool is_positive_outcome(SvtMode mode, const OutcomeLabel& label) {
  if (mode == SvtMode::kAbove) {
    return label.kind == OutcomeLabel::Kind::kAbove;
  }
  return label.kind == OutcomeLabel::Kind::kBetween;
}

// The public counter-update rule: applied identically by the live session
// and by transcript replay.
void apply_published(const Dataset& data, int tau,
                     const SvtHistoryEntry& entry,
                     std::vector<SvtItem>& items) {
  if (!is_positive_outcome(entry.mode, entry.published)) return;
  for (SvtItem& item : items) {
    if (!item.active) continue;
    if (item_weight(data, entry.query, item) > 0.0) {
      ++item.counter;
      if (item.counter == tau) item.active = false;
    }
  }
}

}  // namespace

std::vector<SvtItem> svt_replay(const Dataset& data, int tau,
                                const std::vector<SvtHistoryEntry>& history) {
  std::vector<SvtItem> items = build_items(data);
  for (const SvtHistoryEntry& entry : history) {
    apply_published(data, tau, entry, items);
  }
  return items;
}

SvtSession::SvtSession(const Dataset& data, int tau, double epsilon,
                       std::size_t max_queries)
    : data_(&data), tau_(tau), epsilon_(epsilon), max_queries_(max_queries) {
  if (tau_ < 1) throw std::domain_error("svt: tau must be at least 1");
  if (!(epsilon_ > 0.0)) {
    throw std::domain_error("svt: epsilon must be positive");
  }
  items_ = build_items(data);
}

double SvtSession::active_sum(const LinearQuery& query) const {
  double sum = 0.0;
  for (const SvtItem& item : items_) {
    if (!item.active) continue;
    sum += static_cast<double>(item.multiplicity) *
           item_weight(*data_, query, item);
  }
  return sum;
}

void SvtSession::charge_contributors(const LinearQuery& query) {
  for (SvtItem& item : items_) {
    if (!item.active) continue;
    if (item_weight(*data_, query, item) > 0.0) {
      ++item.counter;
      if (item.counter == tau_) item.active = false;
    }
  }
}

OutcomeLabel SvtSession::run_query(SvtMode mode, const LinearQuery& query,
                                   double t_low, double t_high,
                                   SplitMix64& rng) {
  if (!query.weight) {
    throw std::invalid_argument("svt: query has no weight function");
  }
  if (max_queries_ != 0 && history_.size() >= max_queries_) {
    throw std::logic_error("svt: query cap reached");
  }
  if (mode == SvtMode::kBetween && !(t_low < t_high)) {
    throw std::domain_error("svt: requires t_low < t_high");
  }
  // Validates every active item's weight before any sampling happens.
  const double sum = active_sum(query);
  const double noisy = sum + laplace_sample(1.0 / epsilon_, rng);

  OutcomeLabel label;
  double declared_q = 0.0;
  if (mode == SvtMode::kAbove) {
    label = noisy >= query.threshold ? OutcomeLabel::above(noisy)
                                     : OutcomeLabel::below();
    declared_q = not_prior_q(epsilon_);
  } else {
    if (noisy < t_low) {
      label = OutcomeLabel::low();
    } else if (noisy > t_high) {
      label = OutcomeLabel::high();
    } else {
      label = OutcomeLabel::between();
    }
    declared_q = between_q(epsilon_, t_high - t_low);
  }

  SvtHistoryEntry entry{mode, query, t_low, t_high, label};
  if (is_positive_outcome(mode, label)) {
    charge_contributors(query);
  }
  history_.push_back(std::move(entry));
  if (any_query_) {
    min_q_ = std::min(min_q_, declared_q);
  } else {
    min_q_ = declared_q;
    any_query_ = true;
  }
  check_replay();
  return label;
}

OutcomeLabel SvtSession::query(const LinearQuery& query, SplitMix64& rng) {
  return run_query(SvtMode::kAbove, query, 0.0, 0.0, rng);
}

OutcomeLabel SvtSession::query_between(const LinearQuery& query, double t_low,
                                       double t_high, SplitMix64& rng) {
  return run_query(SvtMode::kBetween, query, t_low, t_high, rng);
}

void SvtSession::check_replay() const {
  const std::vector<SvtItem> replayed = svt_replay(*data_, tau_, history_);
  if (replayed.size() != items_.size()) {
    throw std::logic_error("svt: replay check failed (item count)");
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (replayed[i].identity != items_[i].identity ||
        replayed[i].counter != items_[i].counter ||
        replayed[i].active != items_[i].active) {
      throw std::logic_error("svt: replay check failed (counter divergence)");
    }
  }
}

double SvtSession::min_declared_q() const {
  return any_query_ ? min_q_ : not_prior_q(epsilon_);
}

PrivacyParams SvtSession::report(double alpha,
                                 std::optional<double> target_delta) const {
  TailParams tail{tau_, alpha, 0.0};
  return tct_bound(tail, epsilon_, min_declared_q(), 0.0, target_delta);
}

std::size_t SvtSession::active_items() const {
  return static_cast<std::size_t>(
      std::count_if(items_.begin(), items_.end(),
                    [](const SvtItem& i) { return i.active; }));
}

}  // namespace tct
