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
// End-to-end checks of the installed command-line surface: exit codes,
// calibrate output, audit output, report determinism.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

CommandResult run_command(const std::string& args) {
  const std::string cmd = std::string(TCT_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  CommandResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) {
    result.output += buf.data();
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string temp_dir() {
  const char* env = std::getenv("TMPDIR");
  return env ? env : "/tmp";
}

std::string write_file(const std::string& name, const std::string& content) {
  const std::string path = temp_dir() + "/tct_cli_test_" + name;
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
  return path;
}

std::string grep_line(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line;
  }
  return "";
}

const char* kDataset =
    "age,city\n30,york\n40,leeds\n50,york\n25,hull\n60,york\n";

}  // namespace

TEST_CASE("calibrate prints the budget and its leading constant") {
  const CommandResult res =
      run_command("calibrate --alpha 1 --delta-star 1e-6 --form raw");
  CHECK(res.exit_code == 0);
  const std::string constant = grep_line(res.output, "constant:");
  const std::string tau = grep_line(res.output, "tau:");
  REQUIRE_FALSE(constant.empty());
  REQUIRE_FALSE(tau.empty());
  const double c = std::stod(constant.substr(9));
  CHECK(std::abs(c - 3.26) < 0.005);
  CHECK(std::stoi(tau.substr(4)) == 46);

  const CommandResult half =
      run_command("calibrate --alpha 0.5 --delta-star 1e-6");
  const double c_half = std::stod(grep_line(half.output, "constant:").substr(9));
  CHECK(std::abs(c_half - 10.6) < 0.05);

  const CommandResult five =
      run_command("calibrate --alpha 5 --delta-star 1e-6");
  const double c_five = std::stod(grep_line(five.output, "constant:").substr(9));
  CHECK(std::abs(c_five - 0.31) < 0.005);

  // Near-unit failure mass floors at one hit.
  const CommandResult tiny =
      run_command("calibrate --alpha 1 --delta-star 0.99");
  CHECK(std::stoi(grep_line(tiny.output, "tau:").substr(4)) >= 1);

  CHECK(run_command("calibrate --alpha 1 --delta-star 1.5").exit_code != 0);
}

TEST_CASE("run executes a transcript and reports exit codes") {
  const std::string data = write_file("data.csv", kDataset);
  const std::string always_above =
      R"({"op":"above_threshold","pred":{"col":"age","cmp":"ge","value":0},"threshold":-100})";
  std::string transcript;
  for (int i = 0; i < 10; ++i) transcript += always_above + "\n";
  const std::string tr = write_file("halt.jsonl", transcript);
  const std::string report_path = temp_dir() + "/tct_cli_test_report.json";

  // tau 3 halts on the third op: exit 2.
  const CommandResult halted = run_command(
      "run " + data + " " + tr + " --epsilon 0.1 --tau 3 --seed 9 --out " +
      report_path);
  CHECK(halted.exit_code == 2);

  // Large tau completes: exit 0.
  const CommandResult clean = run_command(
      "run " + data + " " + tr + " --epsilon 0.1 --tau 50 --seed 9 --out " +
      report_path);
  CHECK(clean.exit_code == 0);

  // Malformed transcript: exit 1.
  const std::string bad = write_file("bad.jsonl", "{\"op\":\"nope\"}\n");
  CHECK(run_command("run " + data + " " + bad).exit_code == 1);

  // Unsound q flag: exit 1.
  CHECK(run_command("run " + data + " " + tr + " --q 0.9").exit_code == 1);

  // Missing dataset: exit 1.
  CHECK(run_command("run /does/not/exist.csv " + tr).exit_code == 1);
}

TEST_CASE("reports are byte-identical for identical seeds") {
  const std::string data = write_file("det.csv", kDataset);
  const std::string transcript = write_file(
      "det.jsonl",
      R"({"op":"above_threshold","pred":{"col":"age","cmp":"ge","value":35},"threshold":2})"
      "\n"
      R"({"op":"cr","id":"h","pred":{"col":"age","cmp":"ge","value":0},"target":{"ge":100}})"
      "\n"
      R"({"op":"revise","id":"h","target":{"intervals":[[-100,100]]}})"
      "\n");
  const std::string r1 = temp_dir() + "/tct_cli_test_r1.json";
  const std::string r2 = temp_dir() + "/tct_cli_test_r2.json";
  const std::string args = "run " + data + " " + transcript +
                           " --epsilon 0.2 --tau 20 --delta 1e-8 --seed 123";
  const CommandResult a = run_command(args + " --out " + r1);
  const CommandResult b = run_command(args + " --out " + r2);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.output == b.output);  // published lines

  std::ifstream f1(r1), f2(r2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().find("\"report_version\": 1") != std::string::npos);
}

TEST_CASE("seed falls back to the environment variable") {
  const std::string data = write_file("env.csv", kDataset);
  const std::string tr = write_file(
      "env.jsonl",
      R"({"op":"above_threshold","pred":{"col":"age","cmp":"ge","value":0},"threshold":5})"
      "\n");
  const std::string base = std::string(TCT_CLI_PATH) + " run " + data + " " +
                           tr + " --tau 5 2>/dev/null";
  CommandResult with_env;
  {
    const std::string cmd = "TCT_SEED=777 " + base;
    std::array<char, 4096> buf{};
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) {
      with_env.output += buf.data();
    }
    with_env.exit_code = WEXITSTATUS(pclose(pipe));
  }
  const CommandResult with_flag =
      run_command("run " + data + " " + tr + " --tau 5 --seed 777");
  CHECK(with_env.exit_code == with_flag.exit_code);
  CHECK(with_env.output == with_flag.output);
}

TEST_CASE("audit prints a lower-bound certificate") {
  const CommandResult res = run_command(
      "audit --mechanism above_threshold --epsilon 0.1 --value0 0 --value1 1 "
      "--threshold 0.5 --trials 50000 --seed 4");
  CHECK(res.exit_code == 0);
  const std::string bound =
      grep_line(res.output, "empirical_epsilon_lower_bound:");
  REQUIRE_FALSE(bound.empty());
  CHECK(std::stod(bound.substr(32)) <= 0.1 + 0.02);
  CHECK(res.output.find("lower-bound certificate") != std::string::npos);

  // Wrapped test: the declared parameter is four thirds of epsilon.
  const CommandResult wrapped = run_command(
      "audit --mechanism wrap --epsilon 0.1 --value0 0 --value1 1 "
      "--threshold 0.5 --trials 50000 --seed 5");
  CHECK(wrapped.exit_code == 0);
  const std::string declared = grep_line(wrapped.output, "declared_epsilon:");
  CHECK(std::stod(declared.substr(18)) ==
        doctest::Approx(4.0 / 3.0 * 0.1).epsilon(1e-5));
  const std::string wrapped_bound =
      grep_line(wrapped.output, "empirical_epsilon_lower_bound:");
  CHECK(std::stod(wrapped_bound.substr(32)) <= 4.0 / 3.0 * 0.1 + 0.02);

  CHECK(run_command("audit --mechanism above_threshold --trials 0")
            .exit_code != 0);
  CHECK(run_command("audit --mechanism unknown --trials 10").exit_code != 0);
  // Neighbor values further than one record apart are refused.
  CHECK(run_command("audit --mechanism above_threshold --value0 0 --value1 3 "
                    "--trials 10")
            .exit_code == 1);
}
