/*
   Copyright 2026 The gexp Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Serial reference kernels against their OpenMP versions. Arg 0 is serial,
// arg 1 parallel.

#include <benchmark/benchmark.h>

#include "gexp/diagnostics.hpp"
#include "gexp/policy_process.hpp"

using namespace gexp;

namespace {

const auto kRad = NoiseDistribution::rademacher(1);
const auto kNormal = NoiseDistribution::normal(1);
const UncertaintyDomain kD = UncertaintyDomain::scalar(0.04, 0.25);

Execution exec_of(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_TreeSolve(benchmark::State& state)
{
    const auto f = payoffs::lookback_call(0.0);
    const auto grid = sqrt_grid(kD, 3);
    for (auto _ : state) benchmark::DoNotOptimize(solve_tree(f, kD, grid, kRad, 7, kDefaultTreeBudget, exec_of(state)));
}

void BM_LatticeSolve(benchmark::State& state)
{
    const auto f = payoffs::qv_trace() + payoffs::terminal_call(0.0);
    const auto grid = sqrt_grid(kD, 4);
    const auto quad = quadrature(kNormal, kDefaultQuadratureOrder);
    StateGridSpec spec;
    spec.richardson = false;
    for (auto _ : state) benchmark::DoNotOptimize(solve_lattice(f, kD, grid, kNormal, quad, 16, spec, exec_of(state)));
}

void BM_SimulateDiscrete(benchmark::State& state)
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = solve_lattice(f, kD, sqrt_grid(kD, 4), kRad, kRad.atoms(), 32);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_discrete(vp, kRad, f, 50000, 1, exec_of(state)));
}

void BM_SimulateContinuous(benchmark::State& state)
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = solve_lattice(f, kD, sqrt_grid(kD, 4), kNormal, quadrature(kNormal, 9), 16);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_continuous(vp, f, 8, 10000, 1, exec_of(state)));
}

void BM_DiscretizationScaling(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(discretization_scaling(0.5, {8, 16, 32}, 2000, 1, exec_of(state)));
}

} // namespace

BENCHMARK(BM_TreeSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LatticeSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateDiscrete)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateContinuous)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DiscretizationScaling)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
