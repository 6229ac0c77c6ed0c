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

#pragma once

#include <cstdint>
#include <iosfwd>

#include "gexp/dp_solver.hpp"

namespace gexp {

// Monte Carlo estimate with per-path diagnostics. Bit-identical for a fixed
// (seed, n_paths) regardless of thread count.
struct SimulationEstimate {
    double mean = 0.0;
    double stderr_ = 0.0; // sample standard deviation / sqrt(paths used)
    std::int64_t n_paths = 0;
    std::int64_t failed_paths = 0;
    std::uint64_t seed = 0;
    bool valid = false; // false when more than 0.1% of paths failed

    Vec terminal_mean;   // mean of M_n per component
    Vec terminal_stderr;
    double max_qv_mismatch = 0.0;        // discrete: |N_n - <M>_n| over paths
    std::int64_t inadmissible_steps = 0; // continuous: volatilities outside D
};

struct PathDump {
    std::ostream* out = nullptr;
    std::int64_t max_paths = 1000;
};

/// Draws Y_1..Y_n i.i.d. from nu and advances (M, N) with the extracted
/// policy; averages F over the interpolated pairs.
SimulationEstimate simulate_discrete(const ValueAndPolicy& vp, const NoiseDistribution& nu, const PayoffFunctional& f,
                                     std::int64_t n_paths, std::uint64_t seed, Execution exec = Execution::Parallel,
                                     const PathDump& dump = {});

/// Brownian motion on n * substeps fine steps; on coarse step k the
/// volatility is the policy control evaluated at the coarse skeleton, so M
/// is a stochastic integral with piecewise-constant integrand and <M>
/// accumulates z_k^2 dt. Requires a lattice policy solved with the
/// standard normal law.
SimulationEstimate simulate_continuous(const ValueAndPolicy& vp, const PayoffFunctional& f, int substeps,
                                       std::int64_t n_paths, std::uint64_t seed, Execution exec = Execution::Parallel,
                                       const PathDump& dump = {});

} // namespace gexp
