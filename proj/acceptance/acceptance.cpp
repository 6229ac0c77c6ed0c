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

// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "gexp/diagnostics.hpp"
#include "gexp/oracle_pde.hpp"
#include "gexp/policy_process.hpp"

using namespace gexp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 6)
{
    std::ostringstream s;
    s << std::setprecision(digits) << x;
    return s.str();
}

const auto kRad = NoiseDistribution::rademacher(1);
const UncertaintyDomain kD = UncertaintyDomain::scalar(0.04, 0.25);
const TerminalFn kCall = [](double x) { return std::max(x, 0.0); };
const TerminalFn kNegAbs = [](double x) { return -std::abs(x); };

Outcome singleton_reduction()
{
    const auto d = UncertaintyDomain::scalar(1.0, 1.0);
    const auto f = payoffs::terminal_square();
    double worst = 0.0;
    for (int n : {2, 4, 8}) worst = std::max(worst, std::abs(solve_tree(f, d, sqrt_grid(d, 4), kRad, n).value - 1.0));
    return {worst <= 1e-12, "max |V_n - 1| = " + fmt(worst)};
}

int maximal_control(const ControlGrid& g)
{
    int best = 0;
    for (int c = 1; c < g.size(); ++c)
        if (g.squares[c].trace() > g.squares[best].trace()) best = c;
    return best;
}

ValueAndPolicy one_step_call() { return solve_tree(payoffs::terminal_call(0.0), kD, sqrt_grid(kD, 4), kRad, 1); }

Outcome one_step_call_check()
{
    const auto vp = one_step_call();
    const int root = std::get<TreePolicy>(vp.policy).control[0][0];
    const double err = std::abs(vp.value - 0.25);
    return {err <= 1e-12 && root == maximal_control(vp.controls),
            "V_1 = " + fmt(vp.value, 15) + ", root control " + std::to_string(root) + " of " +
                std::to_string(vp.controls.size())};
}

Outcome oracle_cross_check()
{
    const double cf_call = closed_form_extremal(kCall, Shape::Convex, 0.04, 0.25);
    const double cf_abs = closed_form_extremal(kNegAbs, Shape::Concave, 0.04, 0.25);
    const PdeGrid grid = PdeGrid::standard(0.25);
    const double pde_call = solve_barenblatt(kCall, 0.04, 0.25, grid).value;
    const double pde_abs = solve_barenblatt(kNegAbs, 0.04, 0.25, grid).value;
    const double gap = std::max(std::abs(cf_call - pde_call), std::abs(cf_abs - pde_abs));
    const double target = std::max(std::abs(cf_call - 0.199471), std::abs(cf_abs + 0.159577));
    return {gap <= 1e-3 && target <= 1e-6,
            "closed form " + fmt(cf_call) + " / " + fmt(cf_abs) + ", pde gap " + fmt(gap, 3) + ", target gap " +
                fmt(target, 3)};
}

Outcome convergence()
{
    const double oracle = closed_form_extremal(kCall, Shape::Convex, 0.04, 0.25);
    const auto t = convergence_study(payoffs::terminal_call(0.0), kD, kRad, {4, 8, 16, 32, 64}, oracle, SolverConfig{});
    std::string errors;
    for (const auto& r : t.rows) errors += (errors.empty() ? "" : ", ") + fmt(r.error, 4);
    const double last = t.rows.back().error;
    const bool ok = t.pass && last <= 0.05 && std::isfinite(t.max_scaled_error);
    return {ok, "errors [" + errors + "], max error*n^(1/8) = " + fmt(t.max_scaled_error, 4) + ", inversions " +
                    std::to_string(t.inversions) + (t.failure.empty() ? "" : ", " + t.failure)};
}

Outcome dp_principle()
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = one_step_call();
    const auto est = simulate_discrete(vp, kRad, f, 100000, 2024);
    const double gap = std::abs(est.mean - vp.value);
    return {est.valid && gap <= 3 * est.stderr_,
            "mean " + fmt(est.mean) + " +- " + fmt(est.stderr_, 3) + " vs " + fmt(vp.value)};
}

Outcome continuous_measure()
{
    const auto nu = NoiseDistribution::normal(1);
    const auto f = payoffs::terminal_call(0.0);
    const double oracle = closed_form_extremal(kCall, Shape::Convex, 0.04, 0.25);
    const auto vp = solve_lattice(f, kD, sqrt_grid(kD, 4), nu, quadrature(nu, kDefaultQuadratureOrder), 16);
    const auto est = simulate_continuous(vp, f, 16, 100000, 2025);
    const bool upper = est.mean <= oracle + 3 * est.stderr_;
    const bool lower = est.mean >= vp.value - 3 * est.stderr_ - 1e-2;
    return {est.valid && upper && lower && est.inadmissible_steps == 0,
            "mean " + fmt(est.mean) + " +- " + fmt(est.stderr_, 3) + ", V_16 " + fmt(vp.value) + ", oracle " +
                fmt(oracle) + ", inadmissible steps " + std::to_string(est.inadmissible_steps)};
}

PayoffFunctional random_payoff(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    const double a = w(rng), b = w(rng), c = w(rng), k = 0.3 * w(rng), e = w(rng);
    return PayoffFunctional(
        "random", 1,
        [=](const InterpolatedPath& p) {
            double mx = 0.0, avg = 0.0;
            for (int i = 0; i <= p.steps(); ++i) mx = std::max(mx, p.u_knot(i)(0));
            for (int i = 0; i < p.steps(); ++i) avg += 0.5 * (p.u_knot(i)(0) + p.u_knot(i + 1)(0)) / p.steps();
            return a * std::max(p.u_final()(0) - k, 0.0) + b * mx + c * std::sin(3.0 * avg) + e * p.v_at(0.5)(0, 0);
        },
        10.0, 1.0);
}

Outcome sublinear_properties()
{
    std::mt19937_64 rng(7);
    const auto big = UncertaintyDomain::scalar(0.04, 0.64);
    const auto g = sqrt_grid(kD, 1);
    const auto g_big = sqrt_grid(big, 2); // contains g
    const double tol = 1e-12;
    int failures = 0;
    double worst = 0.0;
    auto check = [&](double excess) {
        worst = std::max(worst, excess);
        if (excess > tol) ++failures;
    };
    for (int pair = 0; pair < 20; ++pair) {
        const int n = 1 + pair % 6;
        const auto f = random_payoff(rng);
        const auto h = random_payoff(rng);
        const double c = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        const double vc = solve_tree(payoffs::constant(c), kD, g, kRad, n).value;
        if (vc != c) ++failures;

        const double vf = solve_tree(f, kD, g, kRad, n).value;
        const double vh = solve_tree(h, kD, g, kRad, n).value;
        check(solve_tree(f + h, kD, g, kRad, n).value - (vf + vh));

        const double lambda = 0.25 + pair;
        check(std::abs(solve_tree(lambda * f, kD, g, kRad, n).value - lambda * vf) / std::max(1.0, lambda));

        // max(f, h) dominates f
        const PayoffFunctional upper("max", 1,
                                     [f, h](const InterpolatedPath& p) { return std::max(f.evaluate(p), h.evaluate(p)); },
                                     20.0, 1.0);
        check(vf - solve_tree(upper, kD, g, kRad, n).value);

        check(vf - solve_tree(f, big, g_big, kRad, n).value);
    }
    return {failures == 0, "20 pairs, n <= 6, worst violation " + fmt(worst, 3) + ", failures " +
                               std::to_string(failures)};
}

Outcome lattice_vs_tree()
{
    const auto f = payoffs::terminal_call(0.0);
    const auto grid = sqrt_grid(kD, 2);
    const double tree = solve_tree(f, kD, grid, kRad, 8).value;
    const auto lat = solve_lattice(f, kD, grid, kRad, kRad.atoms(), 8);
    const double coarse = std::abs(lat.value - tree);
    const double fine = std::abs(lat.diagnostics.refined_value.value() - tree);
    return {coarse <= 1e-2 && fine < coarse,
            "tree " + fmt(tree, 8) + ", |lattice - tree| " + fmt(coarse, 3) + ", refined " + fmt(fine, 3)};
}

std::string scaling_detail(const ScalingReport& r)
{
    std::string s = r.quantity + " normalized [";
    for (std::size_t i = 0; i < r.normalized.size(); ++i) s += (i ? ", " : "") + fmt(r.normalized[i], 3);
    s += "] ratio " + fmt(r.ratio, 3);
    if (r.slope) s += " slope " + fmt(*r.slope, 3);
    return s;
}

Outcome discretization_bounds()
{
    const auto r = discretization_scaling(0.5, {8, 16, 32, 64, 128}, 10000, 31);
    return {r.fourth_moment.pass && r.qv_deviation.pass,
            scaling_detail(r.fourth_moment) + "; " + scaling_detail(r.qv_deviation)};
}

Outcome exp_moments()
{
    const auto r = exp_moment_probe(kD, kRad, 1.0, {16, 64, 256}, 10000, 37);
    return {r.pass, scaling_detail(r) + (r.failure.empty() ? "" : ", " + r.failure)};
}

Outcome distribution_gate()
{
    bool ok = true;
    std::string detail;
    for (int d : {1, 2}) {
        for (const auto& nu : {NoiseDistribution::normal(d), NoiseDistribution::rademacher(d)}) {
            const bool m = validate_moments(nu).pass;
            const bool g = validate_mgf_bound(nu, 2.0, 64).pass;
            ok = ok && m && g;
            detail += nu.kind_name() + std::to_string(d) + (m && g ? " ok, " : " FAILED, ");
        }
    }
    Vec lo(1), hi(1);
    lo << 0.0;
    hi << 2.0;
    const auto skew = NoiseDistribution::finite({lo, hi}, {0.5, 0.5});
    const bool rejected = !validate_moments(skew).pass;
    return {ok && rejected, detail + "non-centred law " + (rejected ? "rejected" : "ACCEPTED")};
}

std::string run_cli(const std::string& args, int& code)
{
    const std::string cmd = std::string(GEXP_CLI_PATH) + " " + args + " 2>&1";
    std::string out;
    std::FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        code = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), got);
    const int status = pclose(p);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

Outcome reproducibility()
{
    const std::string dir = GEXP_CONFIG_DIR;
    const std::array<std::string, 4> runs = {
        "solve --config " + dir + "/call_rademacher.yaml",
        "simulate --config " + dir + "/call_rademacher.yaml --paths 20000",
        "solve --config " + dir + "/call_normal.yaml",
        "simulate --config " + dir + "/call_normal.yaml --paths 20000",
    };
    int identical = 0;
    for (const auto& r : runs) {
        int c1 = 0, c4 = 0, again = 0;
        const std::string one = run_cli(r + " --no-timestamp --threads 1", c1);
        const std::string four = run_cli(r + " --no-timestamp --threads 4", c4);
        const std::string repeat = run_cli(r + " --no-timestamp --threads 4", again);
        if (c1 == 0 && c4 == 0 && again == 0 && one == four && four == repeat && !one.empty()) ++identical;
    }
    return {identical == static_cast<int>(runs.size()),
            std::to_string(identical) + "/" + std::to_string(runs.size()) + " runs byte-identical at 1 and 4 threads"};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;
    std::function<Outcome()> run;
};

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "singleton reduction", 1.0, singleton_reduction},
        {2, "one-step call by enumeration", 1.0, one_step_call_check},
        {3, "closed form vs Barenblatt", 10.0, oracle_cross_check},
        {4, "convergence study", 300.0, convergence},
        {5, "DP principle by simulation", 30.0, dp_principle},
        {6, "continuous measure from the policy", 120.0, continuous_measure},
        {7, "sublinear expectation properties", 60.0, sublinear_properties},
        {8, "lattice vs tree", 60.0, lattice_vs_tree},
        {9, "discretization error scaling", 120.0, discretization_bounds},
        {10, "exponential moment probe", 60.0, exp_moments},
        {11, "distribution gate", 30.0, distribution_gate},
        {12, "CLI reproducibility", 600.0, reproducibility},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.time_limit) {
            o.pass = false;
            o.detail += ", over the " + fmt(c.time_limit) + " s limit";
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << std::setw(2) << c.id << "] " << c.name << ": " << o.detail
                  << " (" << std::fixed << std::setprecision(2) << secs << " s)" << std::defaultfloat << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
