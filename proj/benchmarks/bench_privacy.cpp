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

#include "tct/mechanisms.hpp"
#include "tct/privacy.hpp"
#include "tct/rng.hpp"
#include "tct/verifier.hpp"

namespace {

void BM_NotPriorQ(benchmark::State& state) {
  double eps = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tct::not_prior_q(eps));
    eps += 1e-9;
  }
}
BENCHMARK(BM_NotPriorQ);

void BM_TctBound(benchmark::State& state) {
  const tct::TailParams tail{50, 1.0, 1e-6};
  for (auto _ : state) {
    benchmark::DoNotOptimize(tct::tct_bound(tail, 0.05, 0.3, 1e-7, 1e-9));
  }
}
BENCHMARK(BM_TctBound);

void BM_LaplaceSample(benchmark::State& state) {
  tct::SplitMix64 rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tct::laplace_sample(1.0, rng));
  }
}
BENCHMARK(BM_LaplaceSample);

void BM_DecompositionSearchBinary(benchmark::State& state) {
  const tct::DiscreteDistribution z0 = tct::DiscreteDistribution::bernoulli(0.21);
  const tct::DiscreteDistribution z1 = tct::DiscreteDistribution::bernoulli(0.24);
  const double q = tct::not_prior_q(0.3) - 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tct::decomposition_search(z0, z1, {1}, 0.3, 0.0, q));
  }
}
BENCHMARK(BM_DecompositionSearchBinary);

}  // namespace
