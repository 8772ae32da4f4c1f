// Copyright 2026 The scoretrend Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "scoretrend/indices.hpp"
#include "scoretrend/inference.hpp"
#include "scoretrend/posterior.hpp"
#include "scoretrend/season.hpp"

namespace {

using namespace scoretrend;

ScoreSeries synthetic_series(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 48.0);
  std::normal_distribution<double> step(0.0, 2.0);
  ScoreSeries s;
  for (int i = 0; i < n; ++i) s.times.push_back(t(rng));
  std::sort(s.times.begin(), s.times.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) s.diffs.push_back(d += step(rng));
  return s;
}

const Hyperparams kTheta{0.0, 9.0, 5.0, 1.5};

void BM_MarginalLoglik(benchmark::State& state) {
  const auto s = synthetic_series(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(marginal_loglik(kTheta, s));
}
BENCHMARK(BM_MarginalLoglik)->Arg(100)->Arg(200)->Arg(400);

void BM_LoglikGradient(benchmark::State& state) {
  const auto s = synthetic_series(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(marginal_loglik_gradient(kTheta, s));
  }
}
BENCHMARK(BM_LoglikGradient)->Arg(100)->Arg(200)->Arg(400);

void BM_PosteriorMoments(benchmark::State& state) {
  const auto s = synthetic_series(200);
  const auto grid = equidistant_grid(48.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(posterior_moments(s, kTheta, grid));
}
BENCHMARK(BM_PosteriorMoments)->Arg(61)->Arg(241);

void BM_TrendIndices(benchmark::State& state) {
  const auto s = synthetic_series(200);
  const auto grid = equidistant_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(trend_indices(pointwise_moments(s, kTheta, grid)));
  }
}
BENCHMARK(BM_TrendIndices);

void BM_ClusterTeams(benchmark::State& state) {
  const int teams = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> eti(10.0, 4.0);
  std::vector<MatchEtiRecord> recs;
  int id = 0;
  for (int round = 0; round < 3; ++round) {
    for (int a = 0; a < teams; ++a) {
      for (int b = a + 1; b < teams; ++b) {
        recs.push_back({"m" + std::to_string(id++), "", "T" + std::to_string(a),
                        "T" + std::to_string(b), std::max(0.0, eti(rng))});
      }
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(cluster_teams(recs, 4));
}
BENCHMARK(BM_ClusterTeams)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
