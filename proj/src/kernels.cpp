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

#include "gexp/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gexp/errors.hpp"

namespace gexp::kernels {

namespace {

constexpr double kMarginCells = 2.0;
constexpr double kNegligibleWeight = 1e-12;

inline void tree_backstep_node(std::span<const double> next, std::span<double> cur, std::span<std::int32_t> ctrl,
                               int controls, std::span<const double> weights, std::size_t i)
{
    const int q = static_cast<int>(weights.size());
    const std::size_t b = static_cast<std::size_t>(controls) * q;
    double best = -std::numeric_limits<double>::infinity();
    std::int32_t best_c = 0;
    for (int c = 0; c < controls; ++c) {
        const double* child = next.data() + i * b + static_cast<std::size_t>(c) * q;
        double acc = 0.0;
        for (int x = 0; x < q; ++x) acc += weights[x] * child[x];
        if (acc > best) {
            best = acc;
            best_c = c;
        }
    }
    cur[i] = best;
    ctrl[i] = best_c;
}

void check_tree_sizes(std::span<const double> next, std::span<double> cur, std::span<std::int32_t> ctrl, int controls,
                      std::span<const double> weights)
{
    if (cur.size() != ctrl.size() || next.size() != cur.size() * controls * weights.size())
        throw DimensionError("tree_backstep: inconsistent table sizes");
}

inline void leaf_path(const TreeLeafModel& m, std::size_t leaf, DiscretePathPair& p)
{
    const std::size_t b = static_cast<std::size_t>(m.controls) * m.atoms;
    std::array<std::size_t, 64> digit{};
    for (int k = m.steps - 1; k >= 0; --k) {
        digit[k] = leaf % b;
        leaf /= b;
    }
    for (int k = 0; k < m.steps; ++k) {
        const int c = static_cast<int>(digit[k]) / m.atoms;
        p.u[k + 1] = p.u[k] + m.u_shift[digit[k]];
        p.v[k + 1].assign_sum(p.v[k], m.v_shift[c]);
    }
}

} // namespace

void tree_backstep_serial(std::span<const double> next, std::span<double> cur, std::span<std::int32_t> ctrl,
                          int controls, std::span<const double> weights)
{
    check_tree_sizes(next, cur, ctrl, controls, weights);
    for (std::size_t i = 0; i < cur.size(); ++i) tree_backstep_node(next, cur, ctrl, controls, weights, i);
}

void tree_backstep_parallel(std::span<const double> next, std::span<double> cur, std::span<std::int32_t> ctrl,
                            int controls, std::span<const double> weights)
{
    check_tree_sizes(next, cur, ctrl, controls, weights);
    const auto count = static_cast<std::int64_t>(cur.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i)
        tree_backstep_node(next, cur, ctrl, controls, weights, static_cast<std::size_t>(i));
}

TreeLeafModel::TreeLeafModel(const ControlGrid& grid, const QuadratureRule& quad, int n)
    : steps(n), dim(grid.dim()), controls(grid.size()), atoms(quad.size())
{
    if (n < 1 || n > 64) throw ValidationError("tree: n must be in [1, 64]");
    if (quad.dim() != dim) throw DimensionError("tree: noise and control dimensions differ");
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    for (int c = 0; c < controls; ++c) {
        for (int x = 0; x < atoms; ++x) u_shift.push_back(grid.controls[c].matrix() * quad.nodes[x] * inv_sqrt);
        v_shift.push_back(grid.squares[c] * (1.0 / n));
    }
}

void tree_leaves_serial(const TreeLeafModel& m, const PayoffFunctional& f, std::span<double> out)
{
    InterpolatedPath path(DiscretePathPair::zeros(m.steps, m.dim));
    for (std::size_t leaf = 0; leaf < out.size(); ++leaf) {
        leaf_path(m, leaf, path.mutable_knots());
        out[leaf] = f.evaluate(path);
    }
}

void tree_leaves_parallel(const TreeLeafModel& m, const PayoffFunctional& f, std::span<double> out)
{
    const auto count = static_cast<std::int64_t>(out.size());
    bool failed = false;
    std::string message;
#pragma omp parallel
    {
        InterpolatedPath path(DiscretePathPair::zeros(m.steps, m.dim));
#pragma omp for schedule(static)
        for (std::int64_t leaf = 0; leaf < count; ++leaf) {
            try {
                leaf_path(m, static_cast<std::size_t>(leaf), path.mutable_knots());
                out[leaf] = f.evaluate(path);
            } catch (const std::exception& e) {
#pragma omp critical
                {
                    failed = true;
                    message = e.what();
                }
            }
        }
    }
    if (failed) throw ComputationError(message);
}

LatticeModel::LatticeModel(StateLattice lat, LatticeLayout lay, const ControlGrid& grid, const QuadratureRule& quad, int n)
    : lattice(std::move(lat)), layout(lay), steps(n), controls(grid.size()), nodes(quad.size()), weights(quad.weights)
{
    const int d = layout.dim;
    if (grid.dim() != d || quad.dim() != d) throw DimensionError("lattice: control, noise and payoff dimensions differ");
    if (lattice.rank() != layout.rank()) throw DimensionError("lattice: grid rank does not match the state layout");
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    u_shift.resize(static_cast<std::size_t>(controls) * nodes * d);
    v_shift.resize(static_cast<std::size_t>(controls) * d);
    v_rate_low.assign(d, std::numeric_limits<double>::infinity());
    v_rate_high.assign(d, 0.0);
    for (int c = 0; c < controls; ++c) {
        for (int x = 0; x < nodes; ++x) {
            const Vec s = grid.controls[c].matrix() * quad.nodes[x] * inv_sqrt;
            for (int i = 0; i < d; ++i) u_shift[(static_cast<std::size_t>(c) * nodes + x) * d + i] = s(i);
        }
        for (int i = 0; i < d; ++i) {
            const double dv = grid.squares[c](i, i) / n;
            v_shift[static_cast<std::size_t>(c) * d + i] = dv;
            v_rate_low[i] = std::min(v_rate_low[i], dv);
            v_rate_high[i] = std::max(v_rate_high[i], dv);
        }
    }
}

void LatticeModel::transition(std::span<const double> state, int c, int x, std::span<double> out) const
{
    const int d = layout.dim;
    const double* du = u_shift.data() + (static_cast<std::size_t>(c) * nodes + x) * d;
    for (int i = 0; i < d; ++i) out[i] = state[i] + du[i];
    if (layout.uses_qv)
        for (int i = 0; i < d; ++i) out[d + i] = state[d + i] + v_shift[static_cast<std::size_t>(c) * d + i];
    if (layout.has_extra()) {
        const int e = layout.extra_axis();
        if (layout.kind == MarkovKind::TerminalPlusRunningMax) out[e] = std::max(state[e], out[0]);
        else out[e] = state[e] + 0.5 * (state[0] + out[0]) / steps;
    }
}

namespace {

// Node index range along v axis i needed at `stage`: the exactly reachable
// band widened by one cell per stage, since every stage interpolates from
// the cell around an off-grid successor.
std::pair<int, int> v_range(const LatticeModel& m, int i, int stage)
{
    const auto& ax = m.lattice.axes()[m.layout.v_axis(i)];
    if (ax.points == 1) return {0, 0};
    const double h = ax.step();
    const double lo = stage * m.v_rate_low[i] - (stage + 1) * h;
    const double hi = stage * m.v_rate_high[i] + (stage + 1) * h;
    int a = static_cast<int>(std::ceil((lo - ax.lo) / h - 1e-9));
    int b = static_cast<int>(std::floor((hi - ax.lo) / h + 1e-9));
    a = std::clamp(a, 0, ax.points - 1);
    b = std::clamp(b, a, ax.points - 1);
    return {a, b};
}

} // namespace

bool LatticeModel::reachable(std::size_t node, int stage) const
{
    if (!layout.uses_qv) return true;
    for (int i = 0; i < layout.dim; ++i) {
        const auto [a, b] = v_range(*this, i, stage);
        const int idx = lattice.axis_index(node, layout.v_axis(i));
        if (idx < a || idx > b) return false;
    }
    return true;
}

std::size_t LatticeModel::clamp_to_reachable(std::size_t node, int stage) const
{
    if (!layout.uses_qv) return node;
    for (int i = 0; i < layout.dim; ++i) {
        const int axis = layout.v_axis(i);
        const auto [a, b] = v_range(*this, i, stage);
        const int idx = lattice.axis_index(node, axis);
        const int clamped = std::clamp(idx, a, b);
        node = node - static_cast<std::size_t>(idx) * lattice.stride(axis) +
               static_cast<std::size_t>(clamped) * lattice.stride(axis);
    }
    return node;
}

StateEvaluation evaluate_state(const LatticeModel& m, std::span<const double> next, std::span<const double> state)
{
    std::array<double, 12> buf{};
    const std::span<double> moved(buf.data(), static_cast<std::size_t>(m.lattice.rank()));
    StateEvaluation ev{-std::numeric_limits<double>::infinity(), 0, 0.0};
    for (int c = 0; c < m.controls; ++c) {
        double acc = 0.0;
        for (int x = 0; x < m.nodes; ++x) {
            m.transition(state, c, x, moved);
            // far Gauss-Hermite tails carry no mass worth guarding
            if (m.weights[x] > kNegligibleWeight)
                ev.max_excess = std::max(ev.max_excess, m.lattice.excess_cells(moved));
            acc += m.weights[x] * m.lattice.interpolate(next, moved);
        }
        if (acc > ev.value) {
            ev.value = acc;
            ev.control = c;
        }
    }
    return ev;
}

namespace {

inline bool solve_node(const LatticeModel& m, int stage, std::span<const double> next, std::span<double> cur,
                       std::span<std::int32_t> ctrl, std::size_t node)
{
    if (!m.reachable(node, stage)) return false;
    std::array<double, 12> buf{};
    const std::span<double> state(buf.data(), static_cast<std::size_t>(m.lattice.rank()));
    m.lattice.coords(node, state);
    const StateEvaluation ev = evaluate_state(m, next, state);
    cur[node] = ev.value;
    ctrl[node] = ev.control;
    return ev.max_excess > kMarginCells;
}

inline void fill_node(const LatticeModel& m, int stage, std::span<double> cur, std::span<std::int32_t> ctrl,
                      std::size_t node)
{
    if (m.reachable(node, stage)) return;
    cur[node] = cur[m.clamp_to_reachable(node, stage)];
    ctrl[node] = -1;
}

void check_lattice_sizes(const LatticeModel& m, std::span<const double> next, std::span<double> cur,
                         std::span<std::int32_t> ctrl)
{
    if (next.size() != m.lattice.size() || cur.size() != next.size() || ctrl.size() != next.size())
        throw DimensionError("lattice_backstep: table sizes do not match the lattice");
}

} // namespace

void lattice_backstep_serial(const LatticeModel& m, int stage, std::span<const double> next, std::span<double> cur,
                             std::span<std::int32_t> ctrl, BackstepStats* stats)
{
    check_lattice_sizes(m, next, cur, ctrl);
    std::int64_t extrapolated = 0;
    for (std::size_t node = 0; node < cur.size(); ++node)
        if (solve_node(m, stage, next, cur, ctrl, node)) ++extrapolated;
    for (std::size_t node = 0; node < cur.size(); ++node) fill_node(m, stage, cur, ctrl, node);
    if (stats) stats->extrapolated_states += extrapolated;
}

void lattice_backstep_parallel(const LatticeModel& m, int stage, std::span<const double> next, std::span<double> cur,
                               std::span<std::int32_t> ctrl, BackstepStats* stats)
{
    check_lattice_sizes(m, next, cur, ctrl);
    const auto count = static_cast<std::int64_t>(cur.size());
    std::int64_t extrapolated = 0;
#pragma omp parallel for schedule(static) reduction(+ : extrapolated)
    for (std::int64_t node = 0; node < count; ++node)
        if (solve_node(m, stage, next, cur, ctrl, static_cast<std::size_t>(node))) ++extrapolated;
#pragma omp parallel for schedule(static)
    for (std::int64_t node = 0; node < count; ++node) fill_node(m, stage, cur, ctrl, static_cast<std::size_t>(node));
    if (stats) stats->extrapolated_states += extrapolated;
}

void lattice_terminal(const LatticeModel& m, const MarkovReduction& r, std::span<double> out)
{
    const int d = m.layout.dim;
    const int rank = m.lattice.rank();
    std::array<double, 12> buf{};
    for (std::size_t node = 0; node < out.size(); ++node) {
        m.lattice.coords(node, std::span<double>(buf.data(), static_cast<std::size_t>(rank)));
        const std::span<const double> u(buf.data(), static_cast<std::size_t>(d));
        const std::span<const double> v = m.layout.uses_qv ? std::span<const double>(buf.data() + d, static_cast<std::size_t>(d))
                                                           : std::span<const double>{};
        const double extra = m.layout.has_extra() ? buf[m.layout.extra_axis()] : 0.0;
        out[node] = r.terminal(u, v, extra);
        if (!std::isfinite(out[node])) throw ComputationError("lattice: non-finite terminal payoff");
    }
}

double pairwise_sum(std::span<const double> x)
{
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

} // namespace gexp::kernels
