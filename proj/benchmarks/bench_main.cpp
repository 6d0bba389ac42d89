// Copyright 2026 The bellmap Authors
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

#include <benchmark/benchmark.h>

#include <random>

#include "bellmap/bell_lp.hpp"
#include "bellmap/nelder_mead.hpp"
#include "bellmap/observable.hpp"
#include "bellmap/optimizer.hpp"
#include "bellmap/probability.hpp"
#include "bellmap/scenarios.hpp"

namespace {

using namespace bellmap;

std::vector<double> random_angles(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  std::vector<double> x(n);
  for (double& a : x) a = u(rng);
  return x;
}

std::vector<CMatrix> unitaries(int d, int count, std::uint64_t seed) {
  const auto angles = random_angles(static_cast<std::size_t>(count * d * d), seed);
  std::vector<CMatrix> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(compile_observable(
        ObservableKind::FullUnitary, d,
        std::span<const double>(angles).subspan(static_cast<std::size_t>(i * d * d),
                                                static_cast<std::size_t>(d * d))));
  }
  return out;
}

void BM_CompileObservable(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto angles = random_angles(static_cast<std::size_t>(d * d), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(compile_observable(ObservableKind::FullUnitary, d, angles));
  }
}
BENCHMARK(BM_CompileObservable)->Arg(3)->Arg(5);

void BM_ProbabilityTable(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const QuditState s = symmetric_rank_k_state(d, d);
  const auto a = unitaries(d, 2, 2);
  const auto b = unitaries(d, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(probability_table(s, a, b));
}
BENCHMARK(BM_ProbabilityTable)->Arg(3)->Arg(4)->Arg(5);

// Critical visibility of a fresh table, cold and with the cached phase one.
void BM_CriticalVisibility(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const QuditState s = symmetric_rank_k_state(d, d);
  const ProbabilityTable p = probability_table(s, unitaries(d, m, 4), unitaries(d, m, 5));
  const ProbabilityTable w = white_table(m, d);
  for (auto _ : state) benchmark::DoNotOptimize(critical_visibility(p, w).v_crit);
}
BENCHMARK(BM_CriticalVisibility)->Args({3, 2})->Args({4, 2})->Args({3, 3})
    ->Unit(benchmark::kMillisecond);

void BM_CachedSolver(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const QuditState s = symmetric_rank_k_state(d, d);
  VisibilitySolver solver;
  const ProbabilityTable w = white_table(2, d);
  std::uint64_t seed = 10;
  for (auto _ : state) {
    state.PauseTiming();
    const ProbabilityTable p = probability_table(s, unitaries(d, 2, seed), unitaries(d, 2, seed + 1));
    seed += 2;
    state.ResumeTiming();
    benchmark::DoNotOptimize(solver.solve(p, w).v_crit);
  }
}
BENCHMARK(BM_CachedSolver)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_NelderMeadRosenbrock(benchmark::State& state) {
  const auto f = [](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      s += 100.0 * (x[i + 1] - x[i] * x[i]) * (x[i + 1] - x[i] * x[i]) + (1 - x[i]) * (1 - x[i]);
    }
    return s;
  };
  const std::vector<double> x0(static_cast<std::size_t>(state.range(0)), -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(nelder_mead(f, x0).f);
}
BENCHMARK(BM_NelderMeadRosenbrock)->Arg(4)->Arg(12);

void BM_VisibilityObjective(benchmark::State& state) {
  const ObjectiveSpec spec(symmetric_rank_k_state(3, 3), ObservableKind::FullUnitary);
  VisibilityObjective f(spec);
  const auto x = random_angles(static_cast<std::size_t>(spec.search_dimension()), 6);
  for (auto _ : state) benchmark::DoNotOptimize(f(x));
}
BENCHMARK(BM_VisibilityObjective)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
