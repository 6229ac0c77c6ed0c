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

#include <doctest.h>

#include <cmath>
#include <random>

#include "gexp/dp_solver.hpp"
#include "gexp/errors.hpp"

using namespace gexp;

namespace {

const auto kRad = NoiseDistribution::rademacher(1);
const UncertaintyDomain kD = UncertaintyDomain::scalar(0.04, 0.25);

// E g(sigma S_n / sqrt n) for a symmetric random walk, by binomial sums.
double binomial_expectation(double sigma, int n, const std::function<double(double)>& g)
{
    double total = 0.0;
    double c = 1.0; // C(n, j)
    for (int j = 0; j <= n; ++j) {
        total += c * g(sigma * (2.0 * j - n) / std::sqrt(n));
        c = c * (n - j) / (j + 1);
    }
    return total / std::pow(2.0, n);
}

PayoffFunctional exp_payoff()
{
    return PayoffFunctional(
        "exp", 1, [](const InterpolatedPath& p) { return std::exp(p.u_final()(0)); }, 1.0, 1.0, std::nullopt,
        MarkovReduction{MarkovKind::Terminal, false,
                        [](std::span<const double> u, std::span<const double>, double) { return std::exp(u[0]); }});
}

// A random path functional built from a few features with weights in [-1, 1].
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
            return a * std::max(p.u_final()(0) - k, 0.0) + b * mx + c * std::sin(3.0 * avg) +
                   e * p.v_at(0.5)(0, 0);
        },
        10.0, 1.0);
}

} // namespace

TEST_CASE("singleton domain keeps the isometry")
{
    const auto d = UncertaintyDomain::scalar(1, 1);
    for (int n = 1; n <= 8; ++n) {
        const auto vp = solve_tree(payoffs::terminal_square(), d, sqrt_grid(d, 4), kRad, n);
        CHECK(std::abs(vp.value - 1.0) <= 1e-12);
    }
}

TEST_CASE("one-step call is enumerable by hand")
{
    const auto g = sqrt_grid(kD, 4);
    const auto vp = solve_tree(payoffs::terminal_call(0.0), kD, g, kRad, 1);
    CHECK(std::abs(vp.value - 0.25) <= 1e-12);
    const auto& tp = std::get<TreePolicy>(vp.policy);
    CHECK(tp.control[0][0] == g.max_control_index());
    CHECK(vp.diagnostics.leaves == 10);
}

TEST_CASE("last step of a linear payoff is a martingale")
{
    for (int n : {1, 2, 5}) {
        const auto vp = solve_tree(payoffs::terminal_linear(1.0), kD, sqrt_grid(kD, 3), kRad, n);
        CHECK(std::abs(vp.value) <= 1e-15);
    }
}

TEST_CASE("square payoff picks the maximal variance at every step")
{
    const auto g = sqrt_grid(kD, 3);
    for (int n : {1, 2, 4}) {
        const auto vp = solve_tree(payoffs::terminal_square(), kD, g, kRad, n);
        CHECK(vp.value == doctest::Approx(0.25).epsilon(1e-13));
        const auto& tp = std::get<TreePolicy>(vp.policy);
        // at the root of the last stage, J_{n-1}(u) = u^2 + b/n; check the stage values
        for (std::size_t i = 0; i < tp.value[n - 1].size(); ++i) CHECK(tp.control[n - 1][i] == g.max_control_index());
    }
    const auto nu = NoiseDistribution::normal(1);
    const auto lat = solve_lattice(payoffs::terminal_square(), kD, g, nu, quadrature(nu, 9), 4);
    CHECK(lat.value == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("singleton grid reduces to a plain expectation")
{
    const auto d = UncertaintyDomain::scalar(0.09, 0.09);
    const auto call = [](double x) { return std::max(x - 0.1, 0.0); };
    for (int n : {1, 3, 6}) {
        const auto vp = solve_tree(payoffs::terminal_call(0.1), d, sqrt_grid(d, 2), kRad, n);
        CHECK(vp.value == doctest::Approx(binomial_expectation(0.3, n, call)).epsilon(1e-14));
    }
}

TEST_CASE("constants are preserved")
{
    for (int n : {1, 3, 5}) {
        const auto vp = solve_tree(payoffs::constant(-2.5), kD, sqrt_grid(kD, 2), kRad, n);
        CHECK(vp.value == -2.5);
    }
    const auto nu = NoiseDistribution::normal(1);
    const auto lat = solve_lattice(payoffs::constant(3.25), kD, sqrt_grid(kD, 4), nu, quadrature(nu, 9), 12);
    CHECK(std::abs(lat.value - 3.25) <= 1e-12);
    const auto qv = solve_lattice(payoffs::constant(3.25) + 0.0 * payoffs::qv_trace(), kD, sqrt_grid(kD, 2), nu,
                                  quadrature(nu, 5), 6);
    CHECK(std::abs(qv.value - 3.25) <= 1e-12);
}

TEST_CASE("tree value equals the forward expectation under its policy")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 6; ++trial) {
        const auto f = random_payoff(rng);
        const int n = 1 + trial % 4;
        const auto vp = solve_tree(f, kD, sqrt_grid(kD, 3), kRad, n);
        CHECK(tree_policy_expectation(vp, f) == doctest::Approx(vp.value).epsilon(1e-13));
    }
}

TEST_CASE("strictly convex terminal payoffs use the maximal control everywhere")
{
    const auto g = sqrt_grid(kD, 2);
    for (int n : {2, 4, 6}) {
        const auto vp = solve_tree(exp_payoff(), kD, g, kRad, n);
        const auto& tp = std::get<TreePolicy>(vp.policy);
        for (int k = 0; k < n; ++k)
            for (auto c : tp.control[k]) CHECK(c == g.max_control_index());
    }
}

TEST_CASE("maximal control is optimal for a convex kinked payoff")
{
    const auto g = sqrt_grid(kD, 2);
    const int n = 6;
    const auto vp = solve_tree(payoffs::terminal_call(0.0), kD, g, kRad, n);
    const auto top = solve_tree(payoffs::terminal_call(0.0), kD, sqrt_grid(UncertaintyDomain::scalar(0.25, 0.25), 1),
                                kRad, n);
    CHECK(vp.value == doctest::Approx(top.value).epsilon(1e-14));
}

TEST_CASE("sublinear expectation properties on random payoffs")
{
    std::mt19937_64 rng(99);
    const auto g = sqrt_grid(kD, 2);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 4;
        const auto f = random_payoff(rng);
        const auto h = random_payoff(rng);
        const double vf = solve_tree(f, kD, g, kRad, n).value;
        const double vh = solve_tree(h, kD, g, kRad, n).value;
        const double vsum = solve_tree(f + h, kD, g, kRad, n).value;
        CHECK(vsum <= vf + vh + 1e-12);

        const double lambda = 0.1 + 3.0 * trial;
        CHECK(std::abs(solve_tree(lambda * f, kD, g, kRad, n).value - lambda * vf) <= 1e-12 * std::max(1.0, lambda));

        const PayoffFunctional dominating(
            "dom", 1, [f](const InterpolatedPath& p) { return f.evaluate(p) + std::abs(std::sin(p.u_final()(0))); },
            11.0, 1.0);
        CHECK(solve_tree(dominating, kD, g, kRad, n).value >= vf - 1e-12);
    }
}

TEST_CASE("value grows with the domain and with the control grid")
{
    std::mt19937_64 rng(3);
    const auto small = UncertaintyDomain::scalar(0.04, 0.25);
    const auto big = UncertaintyDomain::scalar(0.04, 0.64);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_payoff(rng);
        const double vs = solve_tree(f, small, sqrt_grid(small, 1), kRad, 3).value;
        const double vb = solve_tree(f, big, sqrt_grid(big, 2), kRad, 3).value;
        CHECK(vs <= vb + 1e-12);
        const double coarse = solve_tree(f, small, sqrt_grid(small, 2), kRad, 3).value;
        const double fine = solve_tree(f, small, sqrt_grid(small, 4), kRad, 3).value;
        CHECK(coarse <= fine + 1e-12);
    }
}

TEST_CASE("quadratic-variation payoffs reach the maximal variance")
{
    const auto vp = solve_tree(payoffs::qv_trace(), kD, sqrt_grid(kD, 2), kRad, 3);
    CHECK(vp.value == doctest::Approx(0.25).epsilon(1e-14));
    const auto nu = NoiseDistribution::normal(1);
    const auto lat = solve_lattice(payoffs::qv_trace(), kD, sqrt_grid(kD, 2), nu, quadrature(nu, 5), 6);
    CHECK(lat.value == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("tree budget")
{
    CHECK(tree_leaf_count(5, 2, 8, 1'000'000'000) == 100'000'000);
    CHECK_THROWS_AS(solve_tree(payoffs::terminal_call(0.0), kD, sqrt_grid(kD, 4), kRad, 8), BudgetExceeded);
    CHECK_THROWS_AS(solve_tree(payoffs::terminal_call(0.0), kD, sqrt_grid(kD, 4), NoiseDistribution::normal(1), 2),
                    ValidationError);
}

TEST_CASE("lattice singleton matches the gaussian integral")
{
    const auto d = UncertaintyDomain::scalar(0.25, 0.25);
    const auto nu = NoiseDistribution::normal(1);
    const double exact = 0.5 / std::sqrt(2.0 * M_PI);
    // the kink of x+ limits Gauss-Hermite accuracy at the last step
    const auto coarse = solve_lattice(payoffs::terminal_call(0.0), d, sqrt_grid(d, 1), nu, quadrature(nu, 9), 8);
    CHECK(std::abs(coarse.value - exact) <= 3e-3);
    const auto fine = solve_lattice(payoffs::terminal_call(0.0), d, sqrt_grid(d, 1), nu, quadrature(nu, 40), 16);
    CHECK(std::abs(fine.value - exact) <= 5e-4);
    const auto smooth = solve_lattice(payoffs::terminal_square(), d, sqrt_grid(d, 1), nu, quadrature(nu, 9), 8);
    CHECK(std::abs(smooth.value - 0.25) <= 1e-5);
}

TEST_CASE("lattice agrees with the tree on a terminal call")
{
    const auto g = sqrt_grid(kD, 2);
    const auto tree = solve_tree(payoffs::terminal_call(0.0), kD, g, kRad, 8);
    const auto lat = solve_lattice(payoffs::terminal_call(0.0), kD, g, kRad, quadrature(kRad, 2), 8);
    const double coarse_gap = std::abs(lat.value - tree.value);
    CHECK(coarse_gap <= 1e-2);
    REQUIRE(lat.diagnostics.refined_value);
    CHECK(std::abs(*lat.diagnostics.refined_value - tree.value) < coarse_gap);
    CHECK(lat.diagnostics.richardson_error.value() >= 0.0);
}

TEST_CASE("lattice agrees with the tree on path-dependent reductions")
{
    const auto g = sqrt_grid(kD, 2);
    const int n = 6;
    for (const auto& f : {payoffs::lookback_call(0.0), payoffs::asian_call(0.0),
                          payoffs::stock_call(1.0, 1.0, StockConvention::Unit)}) {
        const auto tree = solve_tree(f, kD, g, kRad, n);
        const auto lat = solve_lattice(f, kD, g, kRad, quadrature(kRad, 2), n);
        CHECK_MESSAGE(std::abs(lat.value - tree.value) <= 1e-2, f.name() << " " << lat.value << " vs " << tree.value);
    }
}

TEST_CASE("lattice in two dimensions agrees with the tree")
{
    const auto d = UncertaintyDomain::diagonal({0.04, 0.09}, {0.25, 0.36});
    const auto nu = NoiseDistribution::rademacher(2);
    const auto g = sqrt_grid(d, 1);
    const auto f = payoffs::terminal_call(0.0, 2);
    const auto tree = solve_tree(f, d, g, nu, 3);
    const auto lat = solve_lattice(f, d, g, nu, quadrature(nu, 2), 3);
    CHECK(std::abs(lat.value - tree.value) <= 1e-2);
}

TEST_CASE("lattice preconditions")
{
    const auto nu = NoiseDistribution::normal(1);
    CHECK_THROWS_AS(solve_lattice(payoffs::sup_norm_payoff(), kD, sqrt_grid(kD, 2), nu, quadrature(nu, 5), 4),
                    ValidationError);
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 1, 0.5, 0.5, 1;
    b << 1, 0, 0, 2;
    const auto hull = UncertaintyDomain::hull({SymMatrix::from_matrix(a), SymMatrix::from_matrix(b)});
    const auto nu2 = NoiseDistribution::normal(2);
    CHECK_THROWS_AS(solve_lattice(payoffs::qv_trace(2), hull, sqrt_grid(hull, 1), nu2, quadrature(nu2, 3), 2),
                    ValidationError);
}

TEST_CASE("narrow lattices warn about boundary mass")
{
    StateGridSpec spec;
    spec.margin = 2.5;
    spec.richardson = false;
    const auto nu = NoiseDistribution::normal(1);
    const auto vp = solve_lattice(payoffs::terminal_call(0.0), kD, sqrt_grid(kD, 2), nu, quadrature(nu, 9), 16, spec);
    CHECK(vp.diagnostics.boundary_probability > 1e-6);
    CHECK_FALSE(vp.diagnostics.warnings.empty());
}

TEST_CASE("serial and parallel solvers are bit-identical")
{
    const auto g = sqrt_grid(kD, 3);
    const auto f = payoffs::lookback_call(0.0);
    const auto ts = solve_tree(f, kD, g, kRad, 5, kDefaultTreeBudget, Execution::Serial);
    const auto tp = solve_tree(f, kD, g, kRad, 5, kDefaultTreeBudget, Execution::Parallel);
    CHECK(ts.value == tp.value);
    CHECK(std::get<TreePolicy>(ts.policy).control == std::get<TreePolicy>(tp.policy).control);
    CHECK(std::get<TreePolicy>(ts.policy).value == std::get<TreePolicy>(tp.policy).value);

    const auto nu = NoiseDistribution::normal(1);
    const auto q = quadrature(nu, 7);
    const auto ls = solve_lattice(f, kD, g, nu, q, 8, {}, Execution::Serial);
    const auto lp = solve_lattice(f, kD, g, nu, q, 8, {}, Execution::Parallel);
    CHECK(ls.value == lp.value);
    CHECK(std::get<LatticePolicy>(ls.policy).control == std::get<LatticePolicy>(lp.policy).control);
    CHECK(std::get<LatticePolicy>(ls.policy).value == std::get<LatticePolicy>(lp.policy).value);
}

TEST_CASE("off-grid lattice policy agrees with stored nodes")
{
    const auto nu = NoiseDistribution::normal(1);
    const auto vp = solve_lattice(payoffs::terminal_neg_abs(), kD, sqrt_grid(kD, 4), nu, quadrature(nu, 9), 4);
    const auto& lp = std::get<LatticePolicy>(vp.policy);
    const LatticePolicyEvaluator eval(vp);
    const auto& axis = lp.lattice.axes()[0];
    for (int i = axis.points / 4; i < 3 * axis.points / 4; i += 97) {
        const double s[] = {axis.coord(i)};
        for (int k = 0; k < 4; ++k) {
            const auto c = eval.control_at(k, s);
            REQUIRE(c);
            CHECK(*c == lp.control[k][i]);
        }
    }
    const double far[] = {axis.hi + 10 * axis.step()};
    CHECK_FALSE(eval.control_at(1, far).has_value());
}

TEST_CASE("concave payoffs prefer the minimal control")
{
    const auto g = sqrt_grid(kD, 4);
    const auto vp = solve_tree(payoffs::terminal_neg_abs(), kD, g, kRad, 1);
    CHECK(std::get<TreePolicy>(vp.policy).control[0][0] == 0);
    CHECK(vp.value == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("automatic solver choice")
{
    SolverConfig cfg;
    CHECK(solve(payoffs::terminal_call(0.0), kD, kRad, 4, cfg).kind == SolverKind::Tree);
    CHECK(solve(payoffs::terminal_call(0.0), kD, kRad, 16, cfg).kind == SolverKind::Lattice);
    CHECK_THROWS_AS(solve(payoffs::sup_norm_payoff(), kD, kRad, 16, cfg), BudgetExceeded);
}
