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

#include "gexp/errors.hpp"
#include "gexp/payoffs.hpp"

using namespace gexp;

namespace {

InterpolatedPath terminal_path(double u_end, double v_end = 0.0)
{
    auto p = DiscretePathPair::zeros(2, 1);
    p.u[1](0) = 0.5 * u_end;
    p.u[2](0) = u_end;
    p.v[1] = SymMatrix::scalar(1, 0.5 * v_end);
    p.v[2] = SymMatrix::scalar(1, v_end);
    return interpolate(p);
}

InterpolatedPath random_path(std::mt19937_64& rng, int n, int d)
{
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.04, 0.25);
    auto p = DiscretePathPair::zeros(n, d);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) p.u[k + 1](i) = p.u[k](i) + g(rng) / std::sqrt(n);
        std::vector<double> dv(d);
        for (auto& x : dv) x = u(rng) / n;
        p.v[k + 1] = p.v[k] + SymMatrix::diagonal(dv);
    }
    return interpolate(p);
}

} // namespace

TEST_CASE("constant payoff")
{
    const auto f = payoffs::constant(3.7);
    CHECK(f.evaluate(terminal_path(1.3, 0.2)) == 3.7);
    CHECK(f.evaluate(interpolate(DiscretePathPair::zeros(4, 1))) == 3.7);
}

TEST_CASE("call payoff on a negative terminal value")
{
    CHECK(payoffs::terminal_call(0.0).evaluate(terminal_path(-0.4)) == 0.0);
    CHECK(payoffs::terminal_call(0.0).evaluate(terminal_path(0.4)) == 0.4);
}

TEST_CASE("quadratic-variation trace")
{
    auto p = DiscretePathPair::zeros(1, 2);
    const std::vector<double> d = {0.2, 0.3};
    p.v[1] = SymMatrix::diagonal(d);
    CHECK(payoffs::qv_trace(2).evaluate(interpolate(p)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("non-finite payoffs are rejected")
{
    const PayoffFunctional bad("bad", 1, [](const InterpolatedPath&) { return std::nan(""); }, 1.0, 0.0);
    CHECK_THROWS_AS(bad.evaluate(terminal_path(0.1)), ComputationError);
}

TEST_CASE("payoff dimension must match the path")
{
    CHECK_THROWS_AS(payoffs::terminal_call(0.0, 2).evaluate(terminal_path(0.1)), DimensionError);
}

TEST_CASE("payoff constants are validated")
{
    auto eval = [](const InterpolatedPath&) { return 0.0; };
    CHECK_THROWS_AS(PayoffFunctional("x", 1, eval, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(PayoffFunctional("x", 1, eval, 1.0, -1.0), ValidationError);
}

TEST_CASE("stock trajectory")
{
    const auto zero = stock_path(interpolate(DiscretePathPair::zeros(3, 1)), Vec::Constant(1, 100.0));
    for (const auto& s : zero.knots) CHECK(s(0) == 100.0);
    CHECK(stock_path(terminal_path(1.0, 1.0), Vec::Ones(1)).knots.back()(0) == 1.0);
    CHECK(stock_path(terminal_path(0.5, 0.25), Vec::Ones(1)).knots.back()(0) ==
          doctest::Approx(std::exp(0.25)).epsilon(1e-15));
    const auto standard = stock_path(terminal_path(0.5, 0.25), Vec::Ones(1), StockConvention::Half);
    CHECK(standard.knots.back()(0) == doctest::Approx(std::exp(0.375)).epsilon(1e-15));
}

TEST_CASE("stock trajectory without variation is an exponential of the path")
{
    auto p = DiscretePathPair::zeros(3, 1);
    p.u[1](0) = 0.2;
    p.u[2](0) = -0.1;
    p.u[3](0) = 0.4;
    const auto s = stock_path(interpolate(p), Vec::Constant(1, 2.0));
    for (int k = 0; k <= 3; ++k) CHECK(s.knots[k](0) == doctest::Approx(2.0 * std::exp(p.u[k](0))).epsilon(1e-15));
    CHECK(s.at(1.0 / 6.0)(0) == doctest::Approx(0.5 * (s.knots[0](0) + s.knots[1](0))).epsilon(1e-15));
}

TEST_CASE("stock trajectory rejects non-positive start")
{
    CHECK_THROWS_AS(stock_path(terminal_path(0.1), Vec::Zero(1)), ValidationError);
}

TEST_CASE("growth bound check")
{
    CHECK(lipschitz_bound_check(payoffs::constant(2.0), 1000, 1).pass);
    CHECK(lipschitz_bound_check(payoffs::terminal_linear(1.0), 1000, 1).pass);
    const auto square_no_growth = payoffs::terminal_square().with_constants(1.0, 0.0);
    const auto r = lipschitz_bound_check(square_no_growth, 1000, 1);
    CHECK_FALSE(r.pass);
    CHECK(r.max_ratio > 1.0);
}

TEST_CASE("built-in payoffs satisfy their declared growth bounds")
{
    const std::vector<PayoffFunctional> all = {
        payoffs::constant(1.5),
        payoffs::terminal_linear(-2.0),
        payoffs::terminal_call(0.1),
        payoffs::terminal_square(),
        payoffs::terminal_neg_abs(),
        payoffs::qv_trace(),
        payoffs::stock_call(1.0, 1.0, StockConvention::Unit),
        payoffs::stock_call(1.0, 1.0, StockConvention::Half),
        payoffs::lookback_call(0.0),
        payoffs::asian_call(0.0),
        payoffs::sup_norm_payoff(),
    };
    for (const auto& f : all) {
        const auto r = lipschitz_bound_check(f, 10000, 3);
        CHECK_MESSAGE(r.pass, f.name() << " ratio " << r.max_ratio);
    }
    CHECK(lipschitz_bound_check(payoffs::qv_trace(2), 10000, 3, UncertaintyDomain::isotropic(2, 0.1, 1.0)).pass);
}

TEST_CASE("markov reductions agree with the path evaluators")
{
    std::mt19937_64 rng(21);
    const std::vector<PayoffFunctional> all = {
        payoffs::terminal_call(0.1),      payoffs::terminal_square(),
        payoffs::qv_trace(),              payoffs::stock_call(1.0, 0.9, StockConvention::Unit),
        payoffs::lookback_call(0.05),     payoffs::asian_call(-0.02),
        payoffs::terminal_neg_abs(),      payoffs::constant(-1.0),
    };
    for (const auto& f : all) {
        REQUIRE(f.markov());
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 1 + trial % 7;
            const auto p = random_path(rng, n, 1);
            double running_max = 0.0, average = 0.0;
            for (int k = 0; k <= n; ++k) running_max = std::max(running_max, p.u_knot(k)(0));
            for (int k = 0; k < n; ++k) average += 0.5 * (p.u_knot(k)(0) + p.u_knot(k + 1)(0)) / n;
            const double extra = f.markov_kind() == MarkovKind::PathAverage ? average : running_max;
            const double u[] = {p.u_final()(0)};
            const double v[] = {p.v_final()(0, 0)};
            CHECK(f.markov()->terminal(u, v, extra) == doctest::Approx(f.evaluate(p)).epsilon(1e-13));
        }
    }
}

TEST_CASE("payoff algebra")
{
    const auto f = payoffs::terminal_call(0.0) + 2.0 * payoffs::terminal_square();
    const auto p = terminal_path(0.3);
    CHECK(f.evaluate(p) == doctest::Approx(0.3 + 2 * 0.09).epsilon(1e-15));
    CHECK(f.h1() == doctest::Approx(3.0));
    CHECK(f.h2() == 1.0);
    CHECK(f.markov_kind() == MarkovKind::Terminal);
    const auto g = payoffs::terminal_call(0.0) + payoffs::lookback_call(0.0);
    CHECK(g.markov_kind() == MarkovKind::TerminalPlusRunningMax);
    const auto h = payoffs::asian_call(0.0) + payoffs::lookback_call(0.0);
    CHECK(h.markov_kind() == MarkovKind::None);
    CHECK(lipschitz_bound_check(f, 2000, 4).pass);
}
