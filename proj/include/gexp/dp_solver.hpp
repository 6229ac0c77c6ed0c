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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gexp/lattice.hpp"
#include "gexp/noise.hpp"
#include "gexp/payoffs.hpp"
#include "gexp/uncertainty_domain.hpp"

namespace gexp {

namespace kernels {
struct LatticeModel;
}

enum class SolverKind { Tree, Lattice };
enum class Execution { Serial, Parallel };

std::string to_string(SolverKind k);

/// Policy and value tables of the full-history tree.
///
/// With G controls and q noise atoms the branching factor is B = G q. A
/// stage-k node is numbered by its history digits (control * q + atom),
/// first step most significant, so the children of node i are
/// i * B + c * q + x.
struct TreePolicy {
    int control_count = 0;
    int branching = 0;
    std::vector<std::vector<std::int32_t>> control; // stages 0..n-1
    std::vector<std::vector<double>> value;         // stages 0..n

    static std::size_t child(std::size_t node, int control, int atom, int q, int b)
    {
        return node * static_cast<std::size_t>(b) + static_cast<std::size_t>(control * q + atom);
    }
};

// Which lattice axis holds which part of the reduced state.
struct LatticeLayout {
    int dim = 1;
    bool uses_qv = false;
    MarkovKind kind = MarkovKind::Terminal;

    int rank() const { return dim + (uses_qv ? dim : 0) + (has_extra() ? 1 : 0); }
    bool has_extra() const { return kind == MarkovKind::TerminalPlusRunningMax || kind == MarkovKind::PathAverage; }
    int v_axis(int i) const { return dim + i; }
    int extra_axis() const { return dim + (uses_qv ? dim : 0); }
};

struct LatticePolicy {
    StateLattice lattice;
    LatticeLayout layout;
    std::vector<std::vector<double>> value;         // stages 0..n
    std::vector<std::vector<std::int32_t>> control; // stages 0..n-1, -1 on unreachable nodes
};

// Truncation and resolution of the lattice solver. Zero point counts pick a
// default from the lattice rank.
struct StateGridSpec {
    double margin = 6.0;
    int u_points = 0;
    int v_points = 0;
    int extra_points = 0;
    bool richardson = true;
};

struct SolverDiagnostics {
    int quadrature_order = 0;
    int quadrature_nodes = 0;
    int control_resolution = 0;
    int control_count = 0;
    std::uint64_t leaves = 0;
    std::vector<int> state_points;
    std::optional<double> refined_value;
    std::optional<double> richardson_error;
    double boundary_probability = 0.0;
    std::int64_t extrapolated_states = 0;
    std::vector<std::string> warnings;
};

struct ValueAndPolicy {
    double value = 0.0;
    int steps = 0;
    SolverKind kind = SolverKind::Tree;
    UncertaintyDomain domain;
    ControlGrid controls;
    QuadratureRule quad;
    std::string noise_kind;
    std::variant<TreePolicy, LatticePolicy> policy;
    SolverDiagnostics diagnostics;
};

inline constexpr std::uint64_t kDefaultTreeBudget = 10'000'000;

/// Exact value of the grid-restricted problem for a finite-support law by
/// full-history backward recursion. Any payoff is allowed.
ValueAndPolicy solve_tree(const PayoffFunctional& f, const UncertaintyDomain& domain, const ControlGrid& grid,
                          const NoiseDistribution& nu, int n, std::uint64_t budget = kDefaultTreeBudget,
                          Execution exec = Execution::Parallel);

/// Backward recursion on the reduced Markov state of the payoff with
/// multilinear interpolation of the next-stage values.
ValueAndPolicy solve_lattice(const PayoffFunctional& f, const UncertaintyDomain& domain, const ControlGrid& grid,
                             const NoiseDistribution& nu, const QuadratureRule& quad, int n,
                             const StateGridSpec& spec = {}, Execution exec = Execution::Parallel);

enum class SolverChoice { Auto, Tree, Lattice };

struct SolverConfig {
    SolverChoice kind = SolverChoice::Auto;
    int control_resolution = 4;
    int quadrature_order = kDefaultQuadratureOrder;
    std::uint64_t tree_budget = kDefaultTreeBudget;
    StateGridSpec state;
    Execution exec = Execution::Parallel;
};

// Tree when the law has finite support and the leaf count fits the budget,
// lattice otherwise.
ValueAndPolicy solve(const PayoffFunctional& f, const UncertaintyDomain& domain, const NoiseDistribution& nu, int n,
                     const SolverConfig& config);

std::uint64_t tree_leaf_count(int controls, int atoms, int n, std::uint64_t cap);

// Exact forward expectation of F under the extracted tree policy,
// enumerating every noise history.
double tree_policy_expectation(const ValueAndPolicy& vp, const PayoffFunctional& f);

// Control index of the lattice policy at an arbitrary reduced state: the
// argmax over the grid of the quadrature average of the interpolated
// next-stage value. nullopt when the state lies more than two cells
// outside the lattice.
std::optional<int> lattice_policy_at(const ValueAndPolicy& vp, int stage, std::span<const double> state);

// Reusable form of lattice_policy_at for simulations.
class LatticePolicyEvaluator {
public:
    explicit LatticePolicyEvaluator(const ValueAndPolicy& vp);

    std::optional<int> control_at(int stage, std::span<const double> state) const;
    const LatticeLayout& layout() const;

private:
    const ValueAndPolicy* vp_;
    std::shared_ptr<const kernels::LatticeModel> model_;
};

} // namespace gexp
