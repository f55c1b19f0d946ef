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
// tct: run adaptive transcripts of private mechanisms against a dataset
// under target-charging accounting, calibrate hit budgets, and audit
// mechanisms empirically.
//
// Exit codes: 0 clean run, 1 input error, 2 session halted before the
// transcript end.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tct/boundary_wrapper.hpp"
#include "tct/engine.hpp"
#include "tct/mechanisms.hpp"
#include "tct/privacy.hpp"
#include "tct/rng.hpp"
#include "tct/verifier.hpp"

namespace {

std::uint64_t seed_from_env_or(std::uint64_t fallback) {
  if (const char* env = std::getenv("TCT_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return fallback;
}

int run_command(const std::string& dataset_path,
                const std::string& transcript_path, tct::RunFlags flags,
                const std::string& out_path) {
  std::ifstream tin(transcript_path);
  if (!tin) {
    std::cerr << "error: cannot open transcript " << transcript_path << "\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << tin.rdbuf();

  try {
    const tct::Dataset data = tct::Dataset::from_csv_file(dataset_path);
    const std::vector<nlohmann::json> ops =
        tct::parse_transcript(buffer.str());
    const tct::RunResult result = tct::run_transcript(data, ops, flags);

    for (const std::string& line : result.published) {
      std::cout << line << "\n";
    }
    const std::string report = result.report.dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << report;
    } else {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "error: cannot write report to " << out_path << "\n";
        return 1;
      }
      out << report;
    }
    return result.exit_code;
  } catch (const tct::TranscriptError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int calibrate_command(double alpha, double delta_star,
                      const std::string& form) {
  try {
    const tct::ChernoffForm cf = form == "simplified"
                                     ? tct::ChernoffForm::kSimplified
                                     : tct::ChernoffForm::kRaw;
    const double constant = tct::min_tau_constant(alpha, cf);
    const int tau = tct::min_tau(alpha, delta_star, cf);
    std::printf("form: %s\n", form.c_str());
    std::printf("alpha: %g\n", alpha);
    std::printf("delta_star: %g\n", delta_star);
    std::printf("constant: %.6g\n", constant);
    std::printf("tau: %d\n", tau);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

struct AuditSpec {
  std::string mechanism;
  double epsilon = 0.1;
  double value0 = 0.0;
  double value1 = 1.0;  // neighbor sums must differ by at most 1
  double threshold = 0.0;
  double t_low = 0.0;
  double t_high = 1.0;
  long long trials = 100000;
  std::uint64_t seed = 0;
};

int audit_command(const AuditSpec& spec) {
  using tct::SplitMix64;
  try {
    if (std::abs(spec.value1 - spec.value0) > 1.0 + 1e-12) {
      throw std::domain_error(
          "neighbor values must differ by at most 1 (one record)");
    }
    std::function<int(SplitMix64&)> r0, r1;
    int outcomes = 0;
    double declared = spec.epsilon;

    if (spec.mechanism == "above_threshold") {
      auto make = [&](double value) {
        return [value, &spec](SplitMix64& rng) {
          return tct::above_threshold_value(value, spec.threshold,
                                            spec.epsilon, rng)
                         .target_hit
                     ? 1
                     : 0;
        };
      };
      r0 = make(spec.value0);
      r1 = make(spec.value1);
      outcomes = 2;
    } else if (spec.mechanism == "between_thresholds") {
      auto make = [&](double value) {
        return [value, &spec](SplitMix64& rng) {
          const tct::MechanismOutcome out = tct::between_thresholds_value(
              value, spec.t_low, spec.t_high, spec.epsilon, rng);
          switch (out.label.kind) {
            case tct::OutcomeLabel::Kind::kLow:
              return 0;
            case tct::OutcomeLabel::Kind::kBetween:
              return 1;
            default:
              return 2;
          }
        };
      };
      r0 = make(spec.value0);
      r1 = make(spec.value1);
      outcomes = 3;
    } else if (spec.mechanism == "wrap") {
      declared = tct::wrapper_privacy(spec.epsilon);
      auto make = [&](double value) {
        const double p_above =
            tct::above_threshold_prob(value, spec.threshold, spec.epsilon);
        tct::OracleMechanism mech;
        mech.outcome_names = {"Below", "Above"};
        mech.privacy = {spec.epsilon, 0.0};
        mech.probabilities = [p_above]() {
          return std::vector<double>{1.0 - p_above, p_above};
        };
        mech.sampler = [value, &spec](SplitMix64& rng) {
          return tct::above_threshold_value(value, spec.threshold,
                                            spec.epsilon, rng)
                         .target_hit
                     ? 1
                     : 0;
        };
        return [mech](SplitMix64& rng) {
          const tct::WrappedOutcome out = tct::wrap(mech, rng);
          return out.boundary ? 2 : out.outcome;
        };
      };
      r0 = make(spec.value0);
      r1 = make(spec.value1);
      outcomes = 3;
    } else if (spec.mechanism == "run_twice") {
      declared = 2.0 * spec.epsilon;
      auto make = [&](double value) {
        return [value, &spec](SplitMix64& rng) {
          auto one = [&](SplitMix64& r) {
            return tct::above_threshold_value(value, spec.threshold,
                                              spec.epsilon, r)
                           .target_hit
                       ? 1
                       : 0;
          };
          const tct::RunTwiceOutcome out =
              tct::run_twice(one, spec.epsilon, rng);
          return out.first * 2 + out.second;
        };
      };
      r0 = make(spec.value0);
      r1 = make(spec.value1);
      outcomes = 4;
    } else {
      std::cerr << "error: unknown mechanism '" << spec.mechanism << "'\n";
      return 1;
    }

    const tct::AuditResult result =
        tct::mc_privacy_audit(r0, r1, outcomes, spec.trials, spec.seed);
    std::printf("mechanism: %s\n", spec.mechanism.c_str());
    std::printf("declared_epsilon: %.6g\n", declared);
    std::printf("trials: %lld\n", result.trials);
    std::printf("confidence_z: %.3f\n", result.z);
    std::printf("empirical_epsilon_lower_bound: %.6g\n",
                result.epsilon_lower);
    std::printf("note: lower-bound certificate only; it can falsify a "
                "declared epsilon, never prove it\n");
    for (const tct::AuditOutcome& row : result.per_outcome) {
      std::printf("outcome %d: count0=%lld count1=%lld lower=%.6g\n",
                  row.outcome, row.count0, row.count1, row.log_ratio_lower);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"target-charging privacy engine"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand(
      "run", "execute a transcript of adaptive ops against a dataset");
  std::string dataset_path, transcript_path, out_path;
  tct::RunFlags flags;
  double q_flag = -1.0;
  double delta_flag = -1.0;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  run->add_option("dataset", dataset_path, "CSV dataset with a header row")
      ->required();
  run->add_option("transcript", transcript_path,
                  "newline-delimited op records")
      ->required();
  run->add_option("--epsilon", flags.epsilon, "per-call epsilon")
      ->default_val(0.1);
  run->add_option("--tau", flags.tau, "target-hit budget")->default_val(10);
  run->add_option("--tau-delta", flags.tau_delta,
                  "cumulative delta budget")
      ->default_val(0.0);
  run->add_option("--q", q_flag,
                  "session per-hit charge rate; must not exceed any op's "
                  "declared q (default: the sound minimum)");
  run->add_option("--alpha", flags.alpha, "report slack factor")
      ->default_val(1.0);
  run->add_option("--delta", delta_flag,
                  "target delta for the advanced bound");
  run->add_option("--targets", flags.num_targets, "number of targets (1 or 2)")
      ->default_val(1);
  auto* seed_opt =
      run->add_option("--seed", seed_flag, "rng seed (env TCT_SEED fallback)");
  run->add_option("--out", out_path, "report file (default: stdout)");

  // calibrate
  auto* calibrate =
      app.add_subcommand("calibrate", "smallest hit budget for a failure mass");
  double alpha = 1.0, delta_star = 1e-6;
  std::string form = "raw";
  calibrate->add_option("--alpha", alpha, "slack factor")->default_val(1.0);
  calibrate->add_option("--delta-star", delta_star, "target failure mass")
      ->required();
  calibrate->add_option("--form", form, "raw | simplified")
      ->check(CLI::IsMember({"raw", "simplified"}))
      ->default_val("raw");

  // audit
  auto* audit = app.add_subcommand(
      "audit", "Monte Carlo privacy lower bound on a fixed neighbor pair");
  AuditSpec spec;
  audit->add_option("--mechanism", spec.mechanism,
                    "above_threshold | between_thresholds | wrap | run_twice")
      ->required();
  audit->add_option("--epsilon", spec.epsilon, "mechanism epsilon")
      ->default_val(0.1);
  audit->add_option("--value0", spec.value0, "true value on the first dataset")
      ->default_val(0.0);
  audit->add_option("--value1", spec.value1,
                    "true value on the neighbor (within 1)")
      ->default_val(1.0);
  audit->add_option("--threshold", spec.threshold, "decision threshold")
      ->default_val(0.5);
  audit->add_option("--t-low", spec.t_low, "band lower threshold")
      ->default_val(0.0);
  audit->add_option("--t-high", spec.t_high, "band upper threshold")
      ->default_val(1.0);
  audit->add_option("--trials", spec.trials, "Monte Carlo trials")
      ->default_val(100000)
      ->check(CLI::PositiveNumber);
  audit->add_option("--seed", spec.seed, "rng seed")->default_val(0);

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;

  if (run->parsed()) {
    flags.seed = seed_given ? seed_flag : seed_from_env_or(0);
    if (q_flag >= 0.0) flags.q = q_flag;
    if (delta_flag >= 0.0) flags.target_delta = delta_flag;
    return run_command(dataset_path, transcript_path, flags, out_path);
  }
  if (calibrate->parsed()) {
    return calibrate_command(alpha, delta_star, form);
  }
  if (audit->parsed()) {
    return audit_command(spec);
  }
  return 1;
}
