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

#include "gexp/dp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gexp/errors.hpp"
#include "gexp/kernels.hpp"

namespace gexp {

std::string to_string(SolverKind k) { return k == SolverKind::Tree ? "tree" : "lattice"; }

std::uint64_t tree_leaf_count(int controls, int atoms, int n, std::uint64_t cap)
{
    const std::uint64_t b = static_cast<std::uint64_t>(controls) * static_cast<std::uint64_t>(atoms);
    std::uint64_t leaves = 1;
    for (int k = 0; k < n; ++k) {
        if (b != 0 && leaves > cap / b) return cap + 1;
        leaves *= b;
    }
    return leaves;
}

namespace {

void check_common(const PayoffFunctional& f, const UncertaintyDomain& domain, const ControlGrid& grid,
                  const NoiseDistribution& nu, int n)
{
    if (n < 1) throw ValidationError("solver: n must be >= 1");
    if (grid.size() == 0) throw ValidationError("solver: control grid is empty");
    if (f.dim() != domain.dim() || grid.dim() != domain.dim() || nu.dim() != domain.dim())
        throw DimensionError("solver: payoff, domain, grid and noise dimensions differ");
}

} // namespace

ValueAndPolicy solve_tree(const PayoffFunctional& f, const UncertaintyDomain& domain, const ControlGrid& grid,
                          const NoiseDistribution& nu, int n, std::uint64_t budget, Execution exec)
{
    check_common(f, domain, grid, nu, n);
    if (!nu.has_finite_support()) throw ValidationError("solve_tree: requires a finite-support noise law");
    const QuadratureRule& quad = nu.atoms();
    const int g = grid.size();
    const int q = quad.size();
    const std::uint64_t leaves = tree_leaf_count(g, q, n, budget);
    if (leaves > budget) {
        std::ostringstream os;
        os << "solve_tree: (controls * atoms)^n exceeds the leaf budget of " << budget
           << "; use the lattice solver or a smaller n";
        throw BudgetExceeded(os.str());
    }

    TreePolicy tp;
    tp.control_count = g;
    tp.branching = g * q;
    tp.value.resize(static_cast<std::size_t>(n + 1));
    tp.control.resize(static_cast<std::size_t>(n));
    tp.value[n].resize(leaves);

    const kernels::TreeLeafModel model(grid, quad, n);
    if (exec == Execution::Parallel) kernels::tree_leaves_parallel(model, f, tp.value[n]);
    else kernels::tree_leaves_serial(model, f, tp.value[n]);

    std::size_t width = leaves;
    for (int k = n - 1; k >= 0; --k) {
        width /= static_cast<std::size_t>(tp.branching);
        tp.value[k].resize(width);
        tp.control[k].resize(width);
        if (exec == Execution::Parallel)
            kernels::tree_backstep_parallel(tp.value[k + 1], tp.value[k], tp.control[k], g, quad.weights);
        else
            kernels::tree_backstep_serial(tp.value[k + 1], tp.value[k], tp.control[k], g, quad.weights);
    }

    ValueAndPolicy vp;
    vp.value = tp.value[0][0];
    vp.steps = n;
    vp.kind = SolverKind::Tree;
    vp.domain = domain;
    vp.controls = grid;
    vp.quad = quad;
    vp.noise_kind = nu.kind_name();
    vp.diagnostics.quadrature_order = 0;
    vp.diagnostics.quadrature_nodes = q;
    vp.diagnostics.control_resolution = grid.resolution;
    vp.diagnostics.control_count = g;
    vp.diagnostics.leaves = leaves;
    vp.policy = std::move(tp);
    return vp;
}

double tree_policy_expectation(const ValueAndPolicy& vp, const PayoffFunctional& f)
{
    const auto* tp = std::get_if<TreePolicy>(&vp.policy);
    if (!tp) throw ValidationError("tree_policy_expectation: not a tree solution");
    const int n = vp.steps;
    const int q = vp.quad.size();
    const kernels::TreeLeafModel model(vp.controls, vp.quad, n);
    InterpolatedPath path(DiscretePathPair::zeros(n, vp.domain.dim()));

    // depth-first over noise histories following the stored controls
    auto rec = [&](auto&& self, int k, std::size_t node, double prob) -> double {
        if (k == n) return prob * f.evaluate(path);
        const int c = tp->control[k][node];
        double acc = 0.0;
        auto& knots = path.mutable_knots();
        for (int x = 0; x < q; ++x) {
            knots.u[k + 1] = knots.u[k] + model.u_shift[static_cast<std::size_t>(c) * q + x];
            knots.v[k + 1].assign_sum(knots.v[k], model.v_shift[c]);
            acc += self(self, k + 1, TreePolicy::child(node, c, x, q, tp->branching), prob * vp.quad.weights[x]);
        }
        return acc;
    };
    return rec(rec, 0, 0, 1.0);
}

namespace {

int default_u_points(int rank)
{
    switch (rank) {
    case 1: return 4001;
    case 2: return 601;
    case 3: return 201;
    case 4: return 61;
    default: return 21;
    }
}

int make_odd(int p) { return p % 2 == 0 ? p + 1 : p; }

StateLattice build_lattice(const LatticeLayout& layout, const UncertaintyDomain& domain, const StateGridSpec& spec)
{
    if (!(spec.margin > 0.0)) throw ValidationError("state grid: margin must be positive");
    const int rank = layout.rank();
    const int up = make_odd(spec.u_points > 0 ? spec.u_points : default_u_points(rank));
    const int vp = spec.v_points > 0 ? spec.v_points : (rank <= 3 ? 41 : 11);
    const int ep = make_odd(spec.extra_points > 0 ? spec.extra_points : up);
    if (up < 3 || vp < 2 || ep < 3) throw ValidationError("state grid: too few points per axis");
    const double norm = domain.norm();
    const double half_width = spec.margin * std::sqrt(std::max(norm, 1e-12));
    const double v_top = std::max(norm, 1e-12);

    std::vector<LatticeAxis> axes;
    for (int i = 0; i < layout.dim; ++i) axes.push_back({-half_width, half_width, up});
    if (layout.uses_qv)
        for (int i = 0; i < layout.dim; ++i) axes.push_back({0.0, v_top, vp});
    if (layout.kind == MarkovKind::TerminalPlusRunningMax) axes.push_back({0.0, half_width, (ep + 1) / 2});
    if (layout.kind == MarkovKind::PathAverage) axes.push_back({-half_width, half_width, ep});
    return StateLattice(std::move(axes));
}

struct LatticeRun {
    LatticePolicy policy;
    double value = 0.0;
    std::int64_t extrapolated = 0;
};

LatticeRun run_lattice(const MarkovReduction& red, const kernels::LatticeModel& model, int n, Execution exec)
{
    LatticeRun run;
    const std::size_t size = model.lattice.size();
    run.policy.lattice = model.lattice;
    run.policy.layout = model.layout;
    run.policy.value.assign(static_cast<std::size_t>(n + 1), std::vector<double>(size));
    run.policy.control.assign(static_cast<std::size_t>(n), std::vector<std::int32_t>(size));
    kernels::lattice_terminal(model, red, run.policy.value[n]);
    kernels::BackstepStats stats;
    for (int k = n - 1; k >= 0; --k) {
        if (exec == Execution::Parallel)
            kernels::lattice_backstep_parallel(model, k, run.policy.value[k + 1], run.policy.value[k],
                                               run.policy.control[k], &stats);
        else
            kernels::lattice_backstep_serial(model, k, run.policy.value[k + 1], run.policy.value[k],
                                             run.policy.control[k], &stats);
    }
    std::vector<double> origin(static_cast<std::size_t>(model.lattice.rank()), 0.0);
    const kernels::StateEvaluation root = kernels::evaluate_state(model, run.policy.value[1], origin);
    if (root.max_excess > 2.0)
        throw ComputationError("solve_lattice: state-grid truncation is narrower than a single step; increase margin");
    run.value = model.lattice.interpolate(run.policy.value[0], origin);
    run.extrapolated = stats.extrapolated_states;
    return run;
}

} // namespace

ValueAndPolicy solve_lattice(const PayoffFunctional& f, const UncertaintyDomain& domain, const ControlGrid& grid,
                             const NoiseDistribution& nu, const QuadratureRule& quad, int n,
                             const StateGridSpec& spec, Execution exec)
{
    check_common(f, domain, grid, nu, n);
    if (!f.markov()) throw ValidationError("solve_lattice: payoff '" + f.name() + "' declares no Markov descriptor");
    if (quad.dim() != nu.dim()) throw DimensionError("solve_lattice: quadrature dimension mismatch");
    const MarkovReduction& red = *f.markov();

    LatticeLayout layout;
    layout.dim = f.dim();
    layout.uses_qv = red.uses_qv;
    layout.kind = red.kind;
    if (layout.uses_qv && layout.dim > 1 && !domain.is_diagonal())
        throw ValidationError("solve_lattice: QV-dependent payoffs in d >= 2 need a diagonal domain");
    if (layout.rank() > 12) throw ValidationError("solve_lattice: reduced state has too many axes");

    const kernels::LatticeModel model(build_lattice(layout, domain, spec), layout, grid, quad, n);
    LatticeRun run = run_lattice(red, model, n, exec);

    ValueAndPolicy vp;
    vp.value = run.value;
    vp.steps = n;
    vp.kind = SolverKind::Lattice;
    vp.domain = domain;
    vp.controls = grid;
    vp.quad = quad;
    vp.noise_kind = nu.kind_name();
    auto& diag = vp.diagnostics;
    diag.quadrature_order = nu.has_finite_support() ? 0 : static_cast<int>(std::lround(std::pow(quad.size(), 1.0 / nu.dim())));
    diag.quadrature_nodes = quad.size();
    diag.control_resolution = grid.resolution;
    diag.control_count = grid.size();
    for (const auto& ax : model.lattice.axes()) diag.state_points.push_back(ax.points);
    diag.extrapolated_states = run.extrapolated;

    // chance that a worst-case path leaves the u-box (reflection bound)
    double max_shift = 0.0;
    for (double s : model.u_shift) max_shift = std::max(max_shift, std::abs(s));
    const double half_width = model.lattice.axes()[0].hi;
    if (max_shift * n <= half_width) {
        diag.boundary_probability = 0.0;
    } else {
        diag.boundary_probability = std::min(1.0, 2.0 * layout.dim * std::erfc(spec.margin / std::sqrt(2.0)));
    }
    if (diag.boundary_probability > 1e-6) {
        std::ostringstream os;
        os << "truncation too small: boundary hit probability estimate " << diag.boundary_probability;
        diag.warnings.push_back(os.str());
    }

    if (spec.richardson) {
        const kernels::LatticeModel fine(model.lattice.refined(), layout, grid, quad, n);
        const LatticeRun fine_run = run_lattice(red, fine, n, exec);
        diag.refined_value = fine_run.value;
        // multilinear interpolation is second order in the cell size
        diag.richardson_error = std::abs(fine_run.value - run.value) / 3.0;
    }
    vp.policy = std::move(run.policy);
    return vp;
}

ValueAndPolicy solve(const PayoffFunctional& f, const UncertaintyDomain& domain, const NoiseDistribution& nu, int n,
                     const SolverConfig& config)
{
    const ControlGrid grid = sqrt_grid(domain, config.control_resolution);
    bool tree_fits = false;
    if (nu.has_finite_support())
        tree_fits = tree_leaf_count(grid.size(), nu.atoms().size(), n, config.tree_budget) <= config.tree_budget;

    if (config.kind == SolverChoice::Tree || (config.kind == SolverChoice::Auto && tree_fits))
        return solve_tree(f, domain, grid, nu, n, config.tree_budget, config.exec);
    if (config.kind == SolverChoice::Auto && !f.markov())
        throw BudgetExceeded("solve: payoff '" + f.name() +
                             "' has no Markov descriptor and the tree exceeds its budget (or the noise law is not finite)");
    return solve_lattice(f, domain, grid, nu, quadrature(nu, config.quadrature_order), n, config.state, config.exec);
}

LatticePolicyEvaluator::LatticePolicyEvaluator(const ValueAndPolicy& vp) : vp_(&vp)
{
    const auto* lp = std::get_if<LatticePolicy>(&vp.policy);
    if (!lp) throw ValidationError("lattice policy: not a lattice solution");
    model_ = std::make_shared<const kernels::LatticeModel>(lp->lattice, lp->layout, vp.controls, vp.quad, vp.steps);
}

const LatticeLayout& LatticePolicyEvaluator::layout() const { return model_->layout; }

std::optional<int> LatticePolicyEvaluator::control_at(int stage, std::span<const double> state) const
{
    const auto& lp = std::get<LatticePolicy>(vp_->policy);
    if (stage < 0 || stage >= vp_->steps) throw ValidationError("lattice policy: stage out of range");
    if (state.size() != static_cast<std::size_t>(model_->lattice.rank()))
        throw DimensionError("lattice policy: state rank mismatch");
    if (model_->lattice.excess_cells(state) > 2.0) return std::nullopt;
    return kernels::evaluate_state(*model_, lp.value[stage + 1], state).control;
}

std::optional<int> lattice_policy_at(const ValueAndPolicy& vp, int stage, std::span<const double> state)
{
    return LatticePolicyEvaluator(vp).control_at(stage, state);
}

} // namespace gexp
