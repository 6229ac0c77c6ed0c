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

// Inner loops of the solvers and simulators. Every kernel has a serial
// reference version and an OpenMP version; both produce bit-identical
// output for any thread count because each output entry is computed by a
// pure function of read-only inputs.

#include <cstdint>
#include <span>
#include <vector>

#include "gexp/dp_solver.hpp"

namespace gexp::kernels {

// --- tree ---------------------------------------------------------------

// cur[i] = max_c sum_x w_x next[i*B + c*q + x], argmax into ctrl (lowest
// index on ties).
void tree_backstep_serial(std::span<const double> next, std::span<double> cur, std::span<std::int32_t> ctrl,
                          int controls, std::span<const double> weights);
void tree_backstep_parallel(std::span<const double> next, std::span<double> cur, std::span<std::int32_t> ctrl,
                            int controls, std::span<const double> weights);

// Payoff at every leaf of the history tree.
struct TreeLeafModel {
    int steps = 0;
    int dim = 1;
    int controls = 0;
    int atoms = 0;
    std::vector<Vec> u_shift;       // [c * atoms + x] = gamma_c x / sqrt(n)
    std::vector<SymMatrix> v_shift; // [c] = gamma_c^2 / n

    TreeLeafModel(const ControlGrid& grid, const QuadratureRule& quad, int n);
};
void tree_leaves_serial(const TreeLeafModel& m, const PayoffFunctional& f, std::span<double> out);
void tree_leaves_parallel(const TreeLeafModel& m, const PayoffFunctional& f, std::span<double> out);

// --- lattice ------------------------------------------------------------

struct LatticeModel {
    StateLattice lattice;
    LatticeLayout layout;
    int steps = 0;
    int controls = 0;
    int nodes = 0;
    std::vector<double> weights;
    std::vector<double> u_shift; // [(c * nodes + x) * dim + i]
    std::vector<double> v_shift; // [c * dim + i]
    std::vector<double> v_rate_low;
    std::vector<double> v_rate_high;

    LatticeModel(StateLattice lattice, LatticeLayout layout, const ControlGrid& grid, const QuadratureRule& quad, int n);

    // Reduced state after applying control c with noise node x.
    void transition(std::span<const double> state, int c, int x, std::span<double> out) const;

    // Whether a stage-k node lies in the reachable band of accumulated
    // variance (widened by one cell); nodes outside are filled, not solved.
    bool reachable(std::size_t node, int stage) const;
    std::size_t clamp_to_reachable(std::size_t node, int stage) const;
};

struct StateEvaluation {
    double value;
    std::int32_t control;
    double max_excess; // largest extrapolation distance of any query, in cells
};

StateEvaluation evaluate_state(const LatticeModel& m, std::span<const double> next, std::span<const double> state);

struct BackstepStats {
    std::int64_t extrapolated_states = 0; // states with a query more than 2 cells out
};

void lattice_backstep_serial(const LatticeModel& m, int stage, std::span<const double> next, std::span<double> cur,
                             std::span<std::int32_t> ctrl, BackstepStats* stats = nullptr);
void lattice_backstep_parallel(const LatticeModel& m, int stage, std::span<const double> next, std::span<double> cur,
                               std::span<std::int32_t> ctrl, BackstepStats* stats = nullptr);

void lattice_terminal(const LatticeModel& m, const MarkovReduction& r, std::span<double> out);

// --- reductions ----------------------------------------------------------

// Pairwise sum with a fixed pairing order.
double pairwise_sum(std::span<const double> x);

} // namespace gexp::kernels
