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

#include "tct/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tct/accountant.hpp"
#include "tct/boundary_wrapper.hpp"
#include "tct/conditional_release.hpp"
#include "tct/digest.hpp"
#include "tct/privacy.hpp"
#include "tct/rng.hpp"
#include "tct/selection.hpp"
#include "tct/svt.hpp"

namespace tct {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double require_number(const json& op, const char* key, std::size_t line) {
  if (!op.contains(key) || !op[key].is_number()) {
    throw TranscriptError(line, std::string("missing numeric field '") + key +
                                    "'");
  }
  return op[key].get<double>();
}

std::string require_string(const json& op, const char* key, std::size_t line) {
  if (!op.contains(key) || !op[key].is_string()) {
    throw TranscriptError(line, std::string("missing string field '") + key +
                                    "'");
  }
  return op[key].get<std::string>();
}

// ---------------------------------------------------------------------------
// Predicate mini-language
// ---------------------------------------------------------------------------

QueryFn compile_clause(const Dataset& data, const json& clause) {
  if (!clause.is_object() || !clause.contains("col")) {
    throw std::invalid_argument("predicate clause needs a 'col' field");
  }
  const std::size_t col = data.column_index(clause["col"].get<std::string>());

  if (clause.contains("cmp")) {
    const std::string cmp = clause["cmp"].get<std::string>();
    if (!clause.contains("value")) {
      throw std::invalid_argument("comparison clause needs a 'value' field");
    }
    if (clause["value"].is_string()) {
      if (cmp != "eq") {
        throw std::invalid_argument(
            "string-valued clauses support only 'eq'");
      }
      const std::string want = clause["value"].get<std::string>();
      return [col, want](const Dataset& ds, std::size_t row) {
        return ds.text(row, col) == want ? 1.0 : 0.0;
      };
    }
    const double want = clause["value"].get<double>();
    if (cmp == "eq") {
      return [col, want](const Dataset& ds, std::size_t row) {
        return ds.numeric(row, col) == want ? 1.0 : 0.0;
      };
    }
    if (cmp == "ge") {
      return [col, want](const Dataset& ds, std::size_t row) {
        return ds.numeric(row, col) >= want ? 1.0 : 0.0;
      };
    }
    if (cmp == "le") {
      return [col, want](const Dataset& ds, std::size_t row) {
        return ds.numeric(row, col) <= want ? 1.0 : 0.0;
      };
    }
    if (cmp == "gt") {
      return [col, want](const Dataset& ds, std::size_t row) {
        return ds.numeric(row, col) > want ? 1.0 : 0.0;
      };
    }
    if (cmp == "lt") {
      return [col, want](const Dataset& ds, std::size_t row) {
        return ds.numeric(row, col) < want ? 1.0 : 0.0;
      };
    }
    throw std::invalid_argument("unknown comparison '" + cmp + "'");
  }

  if (clause.contains("scale")) {
    if (!clause.value("clamp", false)) {
      throw std::invalid_argument(
          "weighted clause requires 'clamp': true to stay within [0, 1]");
    }
    const double scale = clause["scale"].get<double>();
    return [col, scale](const Dataset& ds, std::size_t row) {
      return std::clamp(ds.numeric(row, col) * scale, 0.0, 1.0);
    };
  }
  throw std::invalid_argument("clause needs either 'cmp' or 'scale'");
}

QueryFn compile_predicate_impl(const Dataset& data, const json& spec) {
  if (spec.is_object()) return compile_clause(data, spec);
  if (spec.is_array()) {
    if (spec.empty()) {
      throw std::invalid_argument("predicate array is empty");
    }
    std::vector<QueryFn> clauses;
    for (const json& c : spec) clauses.push_back(compile_clause(data, c));
    return [clauses](const Dataset& ds, std::size_t row) {
      double v = 1.0;
      for (const QueryFn& c : clauses) v *= c(ds, row);
      return v;
    };
  }
  throw std::invalid_argument("predicate must be a clause or clause array");
}

IntervalSet parse_target(const json& spec, std::size_t line) {
  if (!spec.is_object()) {
    throw TranscriptError(line, "target must be an object");
  }
  std::vector<Interval> parts;
  if (spec.contains("ge")) {
    parts.push_back(Interval::at_least(spec["ge"].get<double>()));
  } else if (spec.contains("gt")) {
    parts.push_back(Interval::greater_than(spec["gt"].get<double>()));
  } else if (spec.contains("intervals")) {
    for (const json& iv : spec["intervals"]) {
      if (!iv.is_array() || iv.size() != 2) {
        throw TranscriptError(line, "interval must be a [lo, hi) pair");
      }
      parts.push_back(
          Interval::half_open(iv[0].get<double>(), iv[1].get<double>()));
    }
  } else if (!spec.contains("empty")) {
    throw TranscriptError(line,
                          "target needs 'ge', 'gt', 'intervals' or 'empty'");
  }
  try {
    return IntervalSet(std::move(parts));
  } catch (const std::invalid_argument& e) {
    throw TranscriptError(line, e.what());
  }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct CompiledCandidate {
  std::string name;
  QueryFn weight;
  double delta = 0.0;
};

class Runner {
 public:
  Runner(const Dataset& data, const std::vector<json>& ops,
         const RunFlags& flags)
      : data_(data), ops_(ops), flags_(flags) {}

  RunResult run();

 private:
  struct OpInfo {
    std::string kind;
    double declared_q = 1.0;
  };

  OpInfo validate_op(const json& op, std::size_t line) const;
  double op_min_q() const;

  std::vector<bool> flags_for_hit(bool hit) const;
  std::vector<bool> two_target_flags(bool above) const;

  std::vector<CompiledCandidate> compile_candidates(const json& op,
                                                    std::size_t line) const;
  std::vector<Candidate> make_candidates(
      const std::vector<CompiledCandidate>& specs) const;

  void exec_op(const json& op, std::size_t line, SplitMix64& rng);
  void publish(const std::string& text);

  OracleMechanism make_oracle(const json& inner,
                              std::size_t line) const;

  ordered_json build_report() const;

  const Dataset& data_;
  const std::vector<json>& ops_;
  RunFlags flags_;
  double session_q_ = 0.0;

  std::unique_ptr<Session> session_;
  CrStore cr_store_;
  std::unique_ptr<SvtSession> svt_;
  std::vector<std::string> published_;
  std::size_t ops_executed_ = 0;
  bool stopped_early_ = false;
};

Runner::OpInfo Runner::validate_op(const json& op, std::size_t line) const {
  if (!op.is_object() || !op.contains("op") || !op["op"].is_string()) {
    throw TranscriptError(line, "op record needs a string 'op' field");
  }
  const std::string kind = op["op"].get<std::string>();
  const double eps = flags_.epsilon;
  OpInfo info{kind, 1.0};

  auto check_pred = [&](const json& spec) {
    try {
      compile_predicate_impl(data_, spec);
    } catch (const std::exception& e) {
      throw TranscriptError(line, e.what());
    }
  };
  auto check_candidates = [&](const json& o) {
    compile_candidates(o, line);  // throws on malformed entries
  };

  if (kind == "above_threshold") {
    if (!op.contains("pred")) throw TranscriptError(line, "missing 'pred'");
    check_pred(op["pred"]);
    require_number(op, "threshold", line);
    info.declared_q = not_prior_q(eps);
  } else if (kind == "between_thresholds") {
    if (!op.contains("pred")) throw TranscriptError(line, "missing 'pred'");
    check_pred(op["pred"]);
    const double lo = require_number(op, "t_low", line);
    const double hi = require_number(op, "t_high", line);
    if (!(lo < hi)) throw TranscriptError(line, "requires t_low < t_high");
    info.declared_q = between_q(eps, hi - lo);
  } else if (kind == "cr") {
    require_string(op, "id", line);
    if (!op.contains("pred")) throw TranscriptError(line, "missing 'pred'");
    check_pred(op["pred"]);
    if (!op.contains("target")) throw TranscriptError(line, "missing 'target'");
    parse_target(op["target"], line);
    if (op.contains("delta")) {
      const double d = op["delta"].get<double>();
      if (!(d >= 0.0) || d >= 1.0) {
        throw TranscriptError(line, "delta must lie in [0, 1)");
      }
    }
    info.declared_q = not_prior_q(eps);
  } else if (kind == "revise") {
    require_string(op, "id", line);
    if (!op.contains("target")) throw TranscriptError(line, "missing 'target'");
    parse_target(op["target"], line);
    info.declared_q = not_prior_q(2.0 * eps);
  } else if (kind == "top_k") {
    const double k = require_number(op, "k", line);
    if (k < 1.0 || k != std::floor(k)) {
      throw TranscriptError(line, "k must be a positive integer");
    }
    check_candidates(op);
    if (static_cast<std::size_t>(k) > op["candidates"].size()) {
      throw TranscriptError(line, "k exceeds the candidate count");
    }
    info.declared_q = not_prior_q(2.0 * eps);
  } else if (kind == "above_threshold_release") {
    require_number(op, "threshold", line);
    check_candidates(op);
    info.declared_q = not_prior_q(eps);
  } else if (kind == "sweep") {
    check_candidates(op);
    if (!op.contains("grid") || !op["grid"].is_array() || op["grid"].empty()) {
      throw TranscriptError(line, "sweep needs a nonempty 'grid' array");
    }
    double prev = std::numeric_limits<double>::infinity();
    for (const json& g : op["grid"]) {
      const double v = g.get<double>();
      if (!(v < prev)) {
        throw TranscriptError(line, "grid must be strictly decreasing");
      }
      prev = v;
    }
    if (!op.contains("stop") || !op["stop"].is_object() ||
        !op["stop"].contains("kind")) {
      throw TranscriptError(line, "sweep needs a 'stop' rule object");
    }
    const std::string stop = op["stop"]["kind"].get<std::string>();
    if (stop != "count" && stop != "gap" && stop != "exhaust") {
      throw TranscriptError(line, "unknown stop rule '" + stop + "'");
    }
    info.declared_q = not_prior_q(2.0 * eps);
  } else if (kind == "wrap" || kind == "run_twice") {
    if (!op.contains("inner") || !op["inner"].is_object()) {
      throw TranscriptError(line, "missing 'inner' mechanism");
    }
    const json& inner = op["inner"];
    const std::string ik = inner.value("kind", "");
    if (ik == "above_threshold") {
      if (!inner.contains("pred")) throw TranscriptError(line, "missing 'pred'");
      check_pred(inner["pred"]);
      require_number(inner, "threshold", line);
    } else if (ik == "between_thresholds") {
      if (!inner.contains("pred")) throw TranscriptError(line, "missing 'pred'");
      check_pred(inner["pred"]);
      const double lo = require_number(inner, "t_low", line);
      const double hi = require_number(inner, "t_high", line);
      if (!(lo < hi)) throw TranscriptError(line, "requires t_low < t_high");
    } else if (ik == "exp_choice") {
      check_candidates(inner);
    } else {
      throw TranscriptError(line, "unknown inner mechanism '" + ik + "'");
    }
    info.declared_q = kind == "wrap" ? boundary_q(eps) : run_twice_q(eps);
  } else if (kind == "svt_query") {
    if (!op.contains("pred")) throw TranscriptError(line, "missing 'pred'");
    check_pred(op["pred"]);
    const std::string mode = op.value("mode", "above");
    if (mode == "above") {
      require_number(op, "threshold", line);
    } else if (mode == "between") {
      const double lo = require_number(op, "t_low", line);
      const double hi = require_number(op, "t_high", line);
      if (!(lo < hi)) throw TranscriptError(line, "requires t_low < t_high");
    } else {
      throw TranscriptError(line, "unknown svt mode '" + mode + "'");
    }
    info.declared_q = 1.0;  // separate per-item accounting; no session charge
  } else if (kind == "exp_choice") {
    check_candidates(op);
    if (op.contains("prior")) {
      const double p = op["prior"].get<double>();
      if (p < 0.0 || p != std::floor(p) ||
          static_cast<std::size_t>(p) >= op["candidates"].size()) {
        throw TranscriptError(line, "prior must index a candidate");
      }
      info.declared_q = not_prior_q(eps);
    } else {
      info.declared_q = 1.0;  // full outcome set: every call is a hit
    }
  } else {
    throw TranscriptError(line, "unknown op '" + kind + "'");
  }
  return info;
}

std::vector<CompiledCandidate> Runner::compile_candidates(
    const json& op, std::size_t line) const {
  if (!op.contains("candidates") || !op["candidates"].is_array() ||
      op["candidates"].empty()) {
    throw TranscriptError(line, "needs a nonempty 'candidates' array");
  }
  std::vector<CompiledCandidate> out;
  std::size_t i = 0;
  for (const json& c : op["candidates"]) {
    CompiledCandidate cc;
    cc.name = c.value("name", std::to_string(i));
    if (!c.contains("pred")) {
      throw TranscriptError(line, "candidate needs a 'pred'");
    }
    try {
      cc.weight = compile_predicate_impl(data_, c["pred"]);
    } catch (const std::exception& e) {
      throw TranscriptError(line, e.what());
    }
    cc.delta = c.value("delta", 0.0);
    if (!(cc.delta >= 0.0) || cc.delta >= 1.0) {
      throw TranscriptError(line, "candidate delta must lie in [0, 1)");
    }
    out.push_back(std::move(cc));
    ++i;
  }
  return out;
}

std::vector<Candidate> Runner::make_candidates(
    const std::vector<CompiledCandidate>& specs) const {
  std::vector<Candidate> out;
  const double eps = flags_.epsilon;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const CompiledCandidate& spec = specs[i];
    Candidate c;
    c.index = static_cast<int>(i);
    c.name = spec.name;
    c.privacy = {eps, spec.delta};
    const double sum = query_sum(data_, LinearQuery{spec.weight, 0.0, ""});
    c.sampler = [sum, eps, name = spec.name](SplitMix64& rng) {
      CandidateDraw d;
      d.score = sum + laplace_sample(1.0 / eps, rng);
      d.solution = name;
      return d;
    };
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<bool> Runner::flags_for_hit(bool hit) const {
  return std::vector<bool>(static_cast<std::size_t>(flags_.num_targets), hit);
}

std::vector<bool> Runner::two_target_flags(bool above) const {
  // Two complementary not-prior targets: counter 0 tracks Above outcomes,
  // counter 1 tracks Below outcomes. Privacy cost ends up governed by the
  // less frequent side.
  std::vector<bool> f(static_cast<std::size_t>(flags_.num_targets), false);
  f[0] = above;
  f[1] = !above;
  return f;
}

void Runner::publish(const std::string& text) { published_.push_back(text); }

OracleMechanism Runner::make_oracle(const json& inner,
                                    std::size_t line) const {
  (void)line;
  const double eps = flags_.epsilon;
  OracleMechanism mech;
  mech.privacy = {eps, 0.0};
  const std::string ik = inner.value("kind", "");
  if (ik == "above_threshold") {
    const QueryFn weight = compile_predicate_impl(data_, inner["pred"]);
    const double threshold = inner["threshold"].get<double>();
    const double sum = query_sum(data_, LinearQuery{weight, threshold, ""});
    const TestMasses masses = above_threshold_masses(sum, threshold, eps);
    mech.outcome_names = {"Below", "Above"};
    mech.probabilities = [masses]() {
      return std::vector<double>{masses.below, masses.above};
    };
    mech.sampler = [sum, threshold, eps](SplitMix64& r) {
      const MechanismOutcome out =
          above_threshold_value(sum, threshold, eps, r);
      return out.target_hit ? 1 : 0;
    };
  } else if (ik == "between_thresholds") {
    const QueryFn weight = compile_predicate_impl(data_, inner["pred"]);
    const double lo = inner["t_low"].get<double>();
    const double hi = inner["t_high"].get<double>();
    const double sum = query_sum(data_, LinearQuery{weight, 0.0, ""});
    const BandMasses masses = between_thresholds_masses(sum, lo, hi, eps);
    mech.outcome_names = {"L", "Between", "H"};
    mech.probabilities = [masses]() {
      return std::vector<double>{masses.low, masses.between, masses.high};
    };
    mech.sampler = [sum, lo, hi, eps](SplitMix64& r) {
      const MechanismOutcome out =
          between_thresholds_value(sum, lo, hi, eps, r);
      switch (out.label.kind) {
        case OutcomeLabel::Kind::kLow:
          return 0;
        case OutcomeLabel::Kind::kBetween:
          return 1;
        default:
          return 2;
      }
    };
  } else {  // exp_choice
    const std::vector<CompiledCandidate> specs = compile_candidates(inner, 0);
    std::vector<double> scores;
    for (const CompiledCandidate& spec : specs) {
      scores.push_back(query_sum(data_, LinearQuery{spec.weight, 0.0, ""}));
      mech.outcome_names.push_back(spec.name);
    }
    const std::vector<double> probs =
        exponential_choice_probabilities(scores, eps);
    mech.probabilities = [probs]() { return probs; };
    mech.sampler = [scores, eps](SplitMix64& r) {
      return exponential_choice(scores, eps, r).label.index;
    };
  }
  return mech;
}

void Runner::exec_op(const json& op, std::size_t line, SplitMix64& rng) {
  const std::string kind = op["op"].get<std::string>();
  const double eps = flags_.epsilon;
  Session& session = *session_;

  if (kind == "above_threshold") {
    const QueryFn weight = compile_predicate_impl(data_, op["pred"]);
    const double threshold = op["threshold"].get<double>();
    const MechanismOutcome out = above_threshold(
        data_, LinearQuery{weight, threshold, ""}, eps, rng);
    std::string text;
    std::vector<bool> hit_flags;
    if (flags_.num_targets == 2) {
      // Two complementary targets need a Boolean test: publishing the noisy
      // value makes the Above side a continuum, and a single-outcome target
      // whose complement is a continuum has no data-independent charge
      // rate. Decision only, both {Above} and {Below} are honest targets.
      text = out.target_hit ? "Above" : "Below";
      hit_flags = two_target_flags(out.target_hit);
    } else {
      text = out.label.to_string();
      hit_flags = flags_for_hit(out.target_hit);
    }
    session.register_call(eps, 0.0, hit_flags, kind, digest_of(text));
    publish(text);
  } else if (kind == "between_thresholds") {
    const QueryFn weight = compile_predicate_impl(data_, op["pred"]);
    const double lo = op["t_low"].get<double>();
    const double hi = op["t_high"].get<double>();
    const MechanismOutcome out = between_thresholds(
        data_, LinearQuery{weight, 0.0, ""}, lo, hi, eps, rng);
    const std::string text = out.label.to_string();
    session.register_call(eps, 0.0, flags_for_hit(out.target_hit), kind,
                          digest_of(text));
    publish(text);
  } else if (kind == "cr") {
    const std::string id = op["id"].get<std::string>();
    const QueryFn weight = compile_predicate_impl(data_, op["pred"]);
    const double sum = query_sum(data_, LinearQuery{weight, 0.0, ""});
    const IntervalSet target = parse_target(op["target"], line);
    const double delta = op.value("delta", 0.0);
    CrOutcome out;
    try {
      out = cr_store_.cr(
          session, id,
          [sum, eps](SplitMix64& r) {
            return sum + laplace_sample(1.0 / eps, r);
          },
          PrivacyParams{eps, delta}, target, rng, "cr:" + id);
    } catch (const std::invalid_argument& e) {
      throw TranscriptError(line, e.what());
    }
    if (out.rejected()) {
      stopped_early_ = true;
      return;
    }
    publish(out.published() ? "Release " + fmt(out.value) : "Bottom");
  } else if (kind == "revise") {
    const std::string id = op["id"].get<std::string>();
    const IntervalSet extension = parse_target(op["target"], line);
    try {
      const CrOutcome out =
          cr_store_.revise(session, id, extension, "revise:" + id);
      if (out.rejected() && session.status() != SessionStatus::kRunning) {
        stopped_early_ = true;
        return;
      }
      if (out.rejected()) {
        publish("Rejected");  // already released
      } else {
        publish(out.published() ? "Release " + fmt(out.value) : "Bottom");
      }
    } catch (const std::invalid_argument& e) {
      throw TranscriptError(line, e.what());
    }
  } else if (kind == "top_k") {
    const int k = op["k"].get<int>();
    const std::vector<Candidate> candidates =
        make_candidates(compile_candidates(op, line));
    const SelectionResult res = top_k_oneshot(session, candidates, k, rng);
    if (res.rejected) {
      publish("Rejected");
      return;
    }
    std::string text = "TopK";
    for (const SelectionWinner& w : res.winners) {
      text += " " + w.name + ":" + fmt(w.score);
    }
    publish(text);
  } else if (kind == "above_threshold_release") {
    const double threshold = op["threshold"].get<double>();
    const std::vector<Candidate> candidates =
        make_candidates(compile_candidates(op, line));
    const SelectionResult res =
        above_threshold_release_all(session, candidates, threshold, rng);
    if (res.rejected) {
      publish("Rejected");
      return;
    }
    std::string text = "Released";
    for (const SelectionWinner& w : res.winners) {
      text += " " + w.name + ":" + fmt(w.score);
    }
    publish(text);
  } else if (kind == "sweep") {
    const std::vector<Candidate> candidates =
        make_candidates(compile_candidates(op, line));
    std::vector<double> grid;
    for (const json& g : op["grid"]) grid.push_back(g.get<double>());
    const std::string stop_kind = op["stop"]["kind"].get<std::string>();
    StopRule rule;
    if (stop_kind == "count") {
      rule = stop_after_count(op["stop"].value("k", 1));
    } else if (stop_kind == "gap") {
      rule = stop_on_score_gap(op["stop"].value("gap", 0.0));
    } else {
      rule = never_stop();
    }
    const SelectionResult res =
        sweep_simulate(session, candidates, rule, grid, rng);
    if (res.rejected) {
      publish("Rejected");
      return;
    }
    std::string text = "Sweep";
    for (const SelectionWinner& w : res.winners) {
      text += " " + w.name + ":" + fmt(w.score);
    }
    publish(text);
  } else if (kind == "wrap") {
    const OracleMechanism mech = make_oracle(op["inner"], line);
    const WrappedOutcome out = wrap(mech, rng);
    const std::string text =
        out.boundary
            ? "Boundary"
            : "Pass " + mech.outcome_names[static_cast<std::size_t>(
                            out.outcome)];
    session.register_call(out.privacy.epsilon, 0.0,
                          flags_for_hit(out.target_hit), kind,
                          digest_of(text));
    publish(text);
  } else if (kind == "run_twice") {
    const OracleMechanism mech = make_oracle(op["inner"], line);
    const RunTwiceOutcome out = run_twice(mech.sampler, eps, rng);
    const std::string text =
        "Pair " +
        mech.outcome_names[static_cast<std::size_t>(out.first)] + " " +
        mech.outcome_names[static_cast<std::size_t>(out.second)];
    session.register_call(out.privacy.epsilon, 0.0,
                          flags_for_hit(out.target_hit), kind,
                          digest_of(text));
    publish(text);
  } else if (kind == "svt_query") {
    if (!svt_) {
      svt_ = std::make_unique<SvtSession>(data_, flags_.tau, eps);
    }
    const QueryFn weight = compile_predicate_impl(data_, op["pred"]);
    const std::string mode = op.value("mode", "above");
    OutcomeLabel label;
    if (mode == "above") {
      const double threshold = op["threshold"].get<double>();
      label = svt_->query(LinearQuery{weight, threshold, ""}, rng);
    } else {
      label = svt_->query_between(LinearQuery{weight, 0.0, ""},
                                  op["t_low"].get<double>(),
                                  op["t_high"].get<double>(), rng);
    }
    publish("SVT " + label.to_string());
  } else if (kind == "exp_choice") {
    const std::vector<CompiledCandidate> specs = compile_candidates(op, line);
    std::vector<double> scores;
    std::vector<std::string> names;
    for (const CompiledCandidate& spec : specs) {
      scores.push_back(query_sum(data_, LinearQuery{spec.weight, 0.0, ""}));
      names.push_back(spec.name);
    }
    const MechanismOutcome out = exponential_choice(scores, eps, rng);
    const int pick = out.label.index;
    bool hit = true;
    if (op.contains("prior")) {
      hit = pick != op["prior"].get<int>();
    }
    const std::string text =
        "Chosen " + names[static_cast<std::size_t>(pick)];
    session.register_call(eps, 0.0, flags_for_hit(hit), kind,
                          digest_of(text));
    publish(text);
  }
}

double Runner::op_min_q() const {
  double min_q = 1.0;
  std::set<std::string> cr_ids;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    min_q = std::min(min_q, validate_op(ops_[i], i + 1).declared_q);
    const std::string kind = ops_[i]["op"].get<std::string>();
    if (kind == "cr") {
      const std::string id = ops_[i]["id"].get<std::string>();
      if (!cr_ids.insert(id).second) {
        throw TranscriptError(i + 1, "duplicate cr id '" + id + "'");
      }
    } else if (kind == "revise") {
      const std::string id = ops_[i]["id"].get<std::string>();
      if (cr_ids.count(id) == 0) {
        throw TranscriptError(i + 1,
                              "revise references unknown cr id '" + id + "'");
      }
    }
  }
  return min_q;
}

ordered_json Runner::build_report() const {
  const Session& session = *session_;
  ordered_json report;
  report["report_version"] = 1;

  ordered_json config;
  config["epsilon"] = flags_.epsilon;
  config["tau"] = flags_.tau;
  config["tau_delta"] = flags_.tau_delta;
  config["q"] = session_q_;
  config["alpha"] = flags_.alpha;
  config["num_targets"] = flags_.num_targets;
  config["seed"] = flags_.seed;
  if (flags_.target_delta) {
    config["target_delta"] = *flags_.target_delta;
  } else {
    config["target_delta"] = nullptr;
  }
  report["config"] = config;

  report["dataset"] = {{"rows", data_.num_rows()},
                       {"columns", data_.columns()}};
  report["transcript"] = {{"ops_total", ops_.size()},
                          {"ops_executed", ops_executed_}};
  switch (session.status()) {
    case SessionStatus::kRunning:
      report["halt"] = "none";
      break;
    case SessionStatus::kHaltedHits:
      report["halt"] = "hits";
      break;
    case SessionStatus::kHaltedDeltaBudget:
      report["halt"] = "delta_budget";
      break;
  }

  ordered_json ledger = ordered_json::array();
  for (const CallRecord& rec : session.ledger()) {
    ordered_json row;
    row["call_id"] = rec.call_id;
    row["tag"] = rec.mechanism_tag;
    row["epsilon"] = rec.epsilon_charged;
    row["delta"] = rec.delta_charged;
    row["hits"] = rec.hit_flags;
    row["digest"] = rec.published_digest;
    ledger.push_back(std::move(row));
  }
  report["ledger"] = ledger;
  report["counters"] = session.counters();
  report["c_delta"] = session.c_delta();

  // Recomputation gate: the reported bounds must reproduce from the ledger
  // alone. A mismatch is an internal fault, never a degraded report.
  const LedgerReplay replay =
      replay_ledger(session.ledger(), flags_.num_targets);
  if (replay.counters != session.counters() ||
      std::abs(replay.c_delta - session.c_delta()) > 1e-12) {
    throw std::logic_error("report: ledger replay diverged from session");
  }

  ordered_json bounds;
  const PrivacyParams basic = session.report(std::nullopt);
  bounds["basic"] = {{"epsilon", basic.epsilon}, {"delta", basic.delta}};
  if (flags_.target_delta) {
    const PrivacyParams adv = session.report(flags_.target_delta);
    bounds["advanced"] = {{"epsilon", adv.epsilon}, {"delta", adv.delta}};
  }
  report["bounds"] = bounds;

  {
    TailParams tail{flags_.tau, flags_.alpha, flags_.tau_delta};
    const PrivacyParams check =
        tct_bound(tail, flags_.epsilon, session_q_, replay.c_delta);
    PrivacyParams expect = check;
    if (flags_.num_targets > 1) {
      expect.delta = (check.delta - replay.c_delta) * flags_.num_targets +
                     replay.c_delta;
    }
    if (expect.epsilon != basic.epsilon || expect.delta != basic.delta) {
      throw std::logic_error("report: bound recomputation mismatch");
    }
  }

  if (svt_) {
    ordered_json svt;
    svt["queries"] = svt_->history().size();
    svt["tau"] = svt_->tau();
    svt["epsilon"] = svt_->epsilon();
    svt["q"] = svt_->min_declared_q();
    svt["active_items"] = svt_->active_items();
    const PrivacyParams basic_svt = svt_->report(flags_.alpha);
    ordered_json svt_bounds;
    svt_bounds["basic"] = {{"epsilon", basic_svt.epsilon},
                           {"delta", basic_svt.delta}};
    if (flags_.target_delta) {
      const PrivacyParams adv_svt =
          svt_->report(flags_.alpha, flags_.target_delta);
      svt_bounds["advanced"] = {{"epsilon", adv_svt.epsilon},
                                {"delta", adv_svt.delta}};
    }
    svt["bounds"] = svt_bounds;
    report["svt"] = svt;
  }

  report["published"] = published_;
  report["recomputation_check"] = "ok";
  return report;
}

RunResult Runner::run() {
  // Static pre-validation: schemas and the q soundness gate, before anything
  // executes or publishes.
  const double min_q = op_min_q();
  if (flags_.q) {
    if (*flags_.q > min_q + 1e-15) {
      throw TranscriptError(
          0, "unsound accounting refused: --q " + fmt(*flags_.q) +
                 " exceeds an op's declared q " + fmt(min_q));
    }
    session_q_ = *flags_.q;
  } else {
    session_q_ = std::min(not_prior_q(flags_.epsilon), min_q);
  }

  SessionConfig config;
  config.tau = flags_.tau;
  config.tau_delta = flags_.tau_delta;
  config.q = session_q_;
  config.epsilon = flags_.epsilon;
  config.num_targets = flags_.num_targets;
  config.alpha = flags_.alpha;
  config.seed = flags_.seed;
  try {
    session_ = std::make_unique<Session>(config);
  } catch (const std::invalid_argument& e) {
    throw TranscriptError(0, e.what());
  }

  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (session_->status() != SessionStatus::kRunning) {
      stopped_early_ = true;
      break;
    }
    SplitMix64 rng = derive_rng(flags_.seed, i);
    exec_op(ops_[i], i + 1, rng);
    if (stopped_early_) break;
    ++ops_executed_;
  }

  RunResult result;
  result.published = published_;
  result.report = build_report();
  result.exit_code = ops_executed_ == ops_.size() ? 0 : 2;
  return result;
}

}  // namespace

QueryFn compile_predicate(const Dataset& data, const json& spec) {
  return compile_predicate_impl(data, spec);
}

std::vector<json> parse_transcript(const std::string& text) {
  std::vector<json> ops;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Skip blanks and comment lines.
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      ops.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw TranscriptError(line_no, std::string("bad JSON: ") + e.what());
    }
  }
  return ops;
}

RunResult run_transcript(const Dataset& data, const std::vector<json>& ops,
                         const RunFlags& flags) {
  if (!(flags.epsilon > 0.0)) {
    throw TranscriptError(0, "--epsilon must be positive");
  }
  if (flags.tau < 1) throw TranscriptError(0, "--tau must be at least 1");
  if (flags.q && (!(*flags.q > 0.0) || *flags.q > 1.0)) {
    throw TranscriptError(0, "--q must lie in (0, 1]");
  }
  if (flags.target_delta &&
      (!(*flags.target_delta > 0.0) || *flags.target_delta >= 1.0)) {
    throw TranscriptError(0, "--delta must lie in (0, 1)");
  }
  if (flags.num_targets != 1 && flags.num_targets != 2) {
    throw TranscriptError(0, "--targets supports 1 or 2");
  }
  Runner runner(data, ops, flags);
  return runner.run();
}

}  // namespace tct
