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

#include "gexp/policy_process.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "gexp/errors.hpp"
#include "gexp/kernels.hpp"

namespace gexp {

namespace {

struct PathOutcome {
    bool ok = false;
    double payoff = 0.0;
    double qv_mismatch = 0.0;
    std::int64_t inadmissible = 0;
};

// Per-thread scratch: knots of the path being built and the controls used.
struct Scratch {
    InterpolatedPath path;
    std::vector<int> controls;
    std::vector<SymMatrix> used;
    Scratch(int steps, int dim) : path(DiscretePathPair::zeros(steps, dim)) {}
};

// Reduced lattice state after a coarse increment du of the martingale and
// dv_diag of its quadratic variation.
void advance_reduced(const LatticeLayout& layout, int n, std::span<double> s, const Vec& du, const SymMatrix& dv)
{
    const int d = layout.dim;
    const double u0_before = s[0];
    for (int i = 0; i < d; ++i) s[i] += du(i);
    if (layout.uses_qv)
        for (int i = 0; i < d; ++i) s[d + i] += dv(i, i);
    if (layout.has_extra()) {
        const int e = layout.extra_axis();
        if (layout.kind == MarkovKind::TerminalPlusRunningMax) s[e] = std::max(s[e], s[0]);
        else s[e] += 0.5 * (u0_before + s[0]) / n;
    }
}

class Driver {
public:
    Driver(const ValueAndPolicy& vp) : vp_(vp)
    {
        if (vp.kind == SolverKind::Lattice) lattice_.emplace(vp);
        const double inv_n = 1.0 / vp.steps;
        for (const auto& sq : vp.controls.squares) v_step_.push_back(sq * inv_n);
    }

    const ValueAndPolicy& vp() const { return vp_; }
    const SymMatrix& v_step(int c) const { return v_step_[c]; }
    const LatticePolicyEvaluator* lattice() const { return lattice_ ? &*lattice_ : nullptr; }

private:
    const ValueAndPolicy& vp_;
    std::vector<SymMatrix> v_step_;
    std::optional<LatticePolicyEvaluator> lattice_;
};

PathOutcome discrete_path(const Driver& drv, const NoiseDistribution& nu, const PayoffFunctional& f,
                          std::uint64_t seed, std::int64_t index, Scratch& sc)
{
    const ValueAndPolicy& vp = drv.vp();
    const int n = vp.steps;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    CounterStream rng(seed, static_cast<std::uint64_t>(index));
    auto& knots = sc.path.mutable_knots();
    PathOutcome out;

    const auto* tp = std::get_if<TreePolicy>(&vp.policy);
    std::size_t node = 0;
    std::array<double, 12> state{};
    const std::span<double> reduced(state.data(), drv.lattice() ? drv.lattice()->layout().rank() : 0);

    for (int k = 0; k < n; ++k) {
        int c;
        if (tp) {
            c = tp->control[k][node];
        } else {
            const auto got = drv.lattice()->control_at(k, reduced);
            if (!got) return out;
            c = *got;
        }
        int atom = -1;
        const Vec y = nu.draw(rng, &atom);
        sc.controls[k] = c;
        sc.used[k] = vp.controls.controls[c];
        const Vec du = vp.controls.controls[c].matrix() * y * inv_sqrt;
        knots.u[k + 1] = knots.u[k] + du;
        knots.v[k + 1].assign_sum(knots.v[k], drv.v_step(c));
        if (tp) node = TreePolicy::child(node, c, atom, vp.quad.size(), tp->branching);
        else advance_reduced(drv.lattice()->layout(), n, reduced, du, drv.v_step(c));
    }
    out.payoff = f.evaluate(sc.path);
    const auto pv = predictable_variation(n, sc.used);
    out.qv_mismatch = (pv.back().matrix() - knots.v[n].matrix()).cwiseAbs().maxCoeff();
    out.ok = true;
    return out;
}

PathOutcome continuous_path(const Driver& drv, const PayoffFunctional& f, int substeps,
                            const std::vector<bool>& admissible, std::uint64_t seed, std::int64_t index, Scratch& sc)
{
    const ValueAndPolicy& vp = drv.vp();
    const int n = vp.steps;
    const int d = vp.domain.dim();
    const double dt = 1.0 / (static_cast<double>(n) * substeps);
    const double sqrt_dt = std::sqrt(dt);
    CounterStream rng(seed, static_cast<std::uint64_t>(index));
    auto& knots = sc.path.mutable_knots();
    PathOutcome out;

    const LatticePolicyEvaluator& pol = *drv.lattice();
    std::array<double, 12> state{};
    const std::span<double> reduced(state.data(), pol.layout().rank());
    Vec dw(d);
    for (int k = 0; k < n; ++k) {
        const auto got = pol.control_at(k, reduced);
        if (!got) return out;
        const int c = *got;
        sc.controls[k] = c;
        if (!admissible[c]) ++out.inadmissible;
        const auto& z = vp.controls.controls[c].matrix();
        const SymMatrix qv_step = vp.controls.squares[c] * dt;
        const int first = k * substeps;
        for (int j = 0; j < substeps; ++j) {
            for (int i = 0; i < d; ++i) dw(i) = sqrt_dt * rng.normal();
            knots.u[first + j + 1] = knots.u[first + j] + z * dw;
            knots.v[first + j + 1].assign_sum(knots.v[first + j], qv_step);
        }
        const Vec coarse = knots.u[first + substeps] - knots.u[first];
        advance_reduced(pol.layout(), n, reduced, coarse, drv.v_step(c));
    }
    out.payoff = f.evaluate(sc.path);
    out.ok = true;
    return out;
}

template <class PathFn>
SimulationEstimate run_paths(const ValueAndPolicy& vp, std::int64_t n_paths, std::uint64_t seed, int fine_steps,
                             Execution exec, const PathDump& dump, PathFn&& simulate_one)
{
    if (n_paths < 2) throw ValidationError("simulation: needs at least 2 paths");
    const int d = vp.domain.dim();
    const int n = vp.steps;
    std::vector<PathOutcome> outcomes(static_cast<std::size_t>(n_paths));
    std::vector<double> terminal(static_cast<std::size_t>(n_paths) * d, 0.0);
    const std::int64_t dumped = dump.out ? std::min(dump.max_paths, n_paths) : 0;
    std::vector<DiscretePathPair> kept(static_cast<std::size_t>(dumped));
    std::vector<std::vector<int>> kept_controls(static_cast<std::size_t>(dumped));

    auto body = [&](Scratch& sc, std::int64_t i) {
        outcomes[i] = simulate_one(sc, i);
        if (outcomes[i].ok)
            for (int j = 0; j < d; ++j) terminal[i * d + j] = sc.path.u_final()(j);
        if (i < dumped) {
            kept[i] = sc.path.knots();
            kept_controls[i] = sc.controls;
        }
    };
    auto fresh = [&] {
        Scratch sc(fine_steps, d);
        sc.controls.assign(static_cast<std::size_t>(n), -1);
        sc.used.assign(static_cast<std::size_t>(n), SymMatrix(d));
        return sc;
    };

    bool failed = false;
    std::string message;
    if (exec == Execution::Serial) {
        Scratch sc = fresh();
        for (std::int64_t i = 0; i < n_paths; ++i) body(sc, i);
    } else {
#pragma omp parallel
        {
            Scratch sc = fresh();
#pragma omp for schedule(static)
            for (std::int64_t i = 0; i < n_paths; ++i) {
                try {
                    body(sc, i);
                } catch (const std::exception& e) {
#pragma omp critical
                    {
                        failed = true;
                        message = e.what();
                    }
                }
            }
        }
    }
    if (failed) throw ComputationError(message);

    // order-fixed reductions over the successful paths
    SimulationEstimate est;
    est.seed = seed;
    std::vector<double> payoffs;
    payoffs.reserve(outcomes.size());
    std::vector<std::vector<double>> comps(static_cast<std::size_t>(d));
    for (std::int64_t i = 0; i < n_paths; ++i) {
        const auto& o = outcomes[i];
        if (!o.ok) {
            ++est.failed_paths;
            continue;
        }
        payoffs.push_back(o.payoff);
        for (int j = 0; j < d; ++j) comps[j].push_back(terminal[i * d + j]);
        est.max_qv_mismatch = std::max(est.max_qv_mismatch, o.qv_mismatch);
        est.inadmissible_steps += o.inadmissible;
    }
    est.n_paths = static_cast<std::int64_t>(payoffs.size());
    est.valid = est.failed_paths * 1000 <= n_paths && est.n_paths >= 2;

    auto mean_se = [](const std::vector<double>& x, double& mean, double& se) {
        const double m = static_cast<double>(x.size());
        mean = kernels::pairwise_sum(x) / m;
        std::vector<double> sq(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
        se = std::sqrt(kernels::pairwise_sum(sq) / (m - 1.0) / m);
    };
    if (est.n_paths >= 2) {
        mean_se(payoffs, est.mean, est.stderr_);
        est.terminal_mean = Vec::Zero(d);
        est.terminal_stderr = Vec::Zero(d);
        for (int j = 0; j < d; ++j) mean_se(comps[j], est.terminal_mean(j), est.terminal_stderr(j));
    }

    if (dump.out) {
        write_csv_header(*dump.out, d, true, true);
        const int per_coarse = fine_steps / n;
        for (std::int64_t i = 0; i < dumped; ++i) {
            if (!outcomes[i].ok) continue;
            std::vector<int> fine_controls(static_cast<std::size_t>(fine_steps));
            for (int k = 0; k < fine_steps; ++k) fine_controls[k] = kept_controls[i][k / per_coarse];
            write_csv_rows(*dump.out, kept[i], i, fine_controls, outcomes[i].payoff);
        }
    }
    return est;
}

} // namespace

SimulationEstimate simulate_discrete(const ValueAndPolicy& vp, const NoiseDistribution& nu, const PayoffFunctional& f,
                                     std::int64_t n_paths, std::uint64_t seed, Execution exec, const PathDump& dump)
{
    if (nu.kind_name() != vp.noise_kind || nu.dim() != vp.domain.dim())
        throw ValidationError("simulate_discrete: sampling law differs from the law the policy was solved with");
    if (vp.kind == SolverKind::Tree && nu.atoms().size() != vp.quad.size())
        throw ValidationError("simulate_discrete: atom count differs from the solved tree");
    if (f.dim() != vp.domain.dim()) throw DimensionError("simulate_discrete: payoff dimension mismatch");
    const Driver drv(vp);
    return run_paths(vp, n_paths, seed, vp.steps, exec, dump, [&](Scratch& sc, std::int64_t i) {
        return discrete_path(drv, nu, f, seed, i, sc);
    });
}

SimulationEstimate simulate_continuous(const ValueAndPolicy& vp, const PayoffFunctional& f, int substeps,
                                       std::int64_t n_paths, std::uint64_t seed, Execution exec, const PathDump& dump)
{
    if (substeps < 1) throw ValidationError("simulate_continuous: substeps must be >= 1");
    if (vp.kind != SolverKind::Lattice || vp.noise_kind != "normal")
        throw ValidationError("simulate_continuous: needs a lattice policy solved with the standard normal law");
    if (f.dim() != vp.domain.dim()) throw DimensionError("simulate_continuous: payoff dimension mismatch");
    const Driver drv(vp);
    std::vector<bool> admissible;
    for (const auto& sq : vp.controls.squares) admissible.push_back(vp.domain.contains(sq));
    return run_paths(vp, n_paths, seed, vp.steps * substeps, exec, dump, [&](Scratch& sc, std::int64_t i) {
        return continuous_path(drv, f, substeps, admissible, seed, i, sc);
    });
}

} // namespace gexp
