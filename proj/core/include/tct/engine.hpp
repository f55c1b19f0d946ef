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
// Transcript execution: parse newline-delimited ops, validate them against
// the session configuration (including the q soundness gate), run them in
// order against one session, and emit the machine-readable report. The
// command-line tool is a thin shell over this.

#ifndef TCT_ENGINE_HPP_
#define TCT_ENGINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tct/data.hpp"
#include "tct/mechanisms.hpp"

namespace tct {

// Input problems carry the transcript line for diagnostics; line 0 means the
// problem is not tied to a specific line.
class TranscriptError : public std::runtime_error {
 public:
  TranscriptError(std::size_t line, const std::string& message)
      : std::runtime_error(line == 0
                               ? message
                               : "line " + std::to_string(line) + ": " +
                                     message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct RunFlags {
  double epsilon = 0.1;
  int tau = 1;
  double tau_delta = 0.0;
  std::optional<double> q;  // default: min(not_prior_q(eps), op minimum)
  double alpha = 1.0;
  std::optional<double> target_delta;  // advanced bound when present
  int num_targets = 1;
  std::uint64_t seed = 0;
};

struct RunResult {
  int exit_code = 0;  // 0 clean, 2 halted before the transcript end
  std::vector<std::string> published;  // one line per executed op
  nlohmann::ordered_json report;
};

// Compiles the predicate mini-language against a dataset: a clause object or
// an array of clauses whose values multiply. Comparison clauses
// {col, cmp in {eq, ge, le, gt, lt}, value} yield {0, 1}; weighted clauses
// {col, scale, clamp: true} yield clamp(value * scale, 0, 1).
QueryFn compile_predicate(const Dataset& data, const nlohmann::json& spec);

// Splits transcript text into nonempty lines and parses each as one op.
std::vector<nlohmann::json> parse_transcript(const std::string& text);

// Executes the transcript against a fresh session. Throws TranscriptError on
// any input problem (schema violation, unknown column, unsound q flag);
// nothing is executed or published in that case.
RunResult run_transcript(const Dataset& data,
                         const std::vector<nlohmann::json>& ops,
                         const RunFlags& flags);

}  // namespace tct

#endif  // TCT_ENGINE_HPP_
