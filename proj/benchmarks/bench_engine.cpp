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

#include <benchmark/benchmark.h>

#include <sstream>

#include "tct/accountant.hpp"
#include "tct/data.hpp"
#include "tct/engine.hpp"
#include "tct/svt.hpp"

namespace {

tct::Dataset bench_dataset(int rows) {
  std::stringstream csv;
  csv << "age,group\n";
  for (int i = 0; i < rows; ++i) {
    csv << (20 + i % 60) << "," << (i % 7) << "\n";
  }
  return tct::Dataset::from_csv(csv);
}

void BM_SessionRegister(benchmark::State& state) {
  tct::SessionConfig config;
  config.tau = 1 << 30;
  config.tau_delta = 1.0 - 1e-9;
  config.q = 0.5;
  config.epsilon = 0.1;
  tct::Session session(config);
  const std::vector<bool> miss{false};
  for (auto _ : state) {
    benchmark::DoNotOptimize(session.register_call(0.1, 0.0, miss, "bench"));
  }
}
BENCHMARK(BM_SessionRegister);

void BM_TranscriptAboveThreshold(benchmark::State& state) {
  const tct::Dataset data = bench_dataset(1000);
  std::vector<nlohmann::json> ops(
      100, nlohmann::json::parse(
               R"({"op":"above_threshold","pred":{"col":"age","cmp":"ge","value":40},"threshold":900})"));
  tct::RunFlags flags;
  flags.epsilon = 0.1;
  flags.tau = 1000;
  flags.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tct::run_transcript(data, ops, flags));
  }
}
BENCHMARK(BM_TranscriptAboveThreshold);

void BM_SvtQuery(benchmark::State& state) {
  const tct::Dataset data = bench_dataset(static_cast<int>(state.range(0)));
  const std::size_t col = data.column_index("group");
  tct::SvtSession session(data, 1 << 30, 0.5);
  tct::LinearQuery query{
      [col](const tct::Dataset& ds, std::size_t row) {
        return ds.numeric(row, col) == 3.0 ? 1.0 : 0.0;
      },
      1e12, "group=3"};
  tct::SplitMix64 rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(session.query(query, rng));
  }
}
// The session replays its public transcript after every query, so per-query
// cost grows with history; cap iterations to measure the early regime.
BENCHMARK(BM_SvtQuery)->Arg(100)->Arg(1000)->Iterations(200);

}  // namespace
