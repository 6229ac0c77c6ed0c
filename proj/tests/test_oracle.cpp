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

#include "gexp/errors.hpp"
#include "gexp/oracle_pde.hpp"

using namespace gexp;

namespace {

const double kCall = 0.5 / std::sqrt(2.0 * M_PI);
const double kNegAbs = -0.2 * std::sqrt(2.0 / M_PI);

double pos(double x) { return std::max(x, 0.0); }
double neg_abs(double x) { return -std::abs(x); }

} // namespace

TEST_CASE("heat equation limit")
{
    const auto r = solve_barenblatt(pos, 0.25, 0.25, PdeGrid::standard(0.25));
    CHECK(std::abs(r.value - kCall) <= 1e-3);
}

TEST_CASE("linear terminal data stays a martingale")
{
    const auto r = solve_barenblatt([](double x) { return 2.0 * x; }, 0.04, 0.25, PdeGrid::standard(0.25));
    CHECK(std::abs(r.value) <= 1e-12);
}

TEST_CASE("convex square uses the maximal variance")
{
    const auto sq = [](double x) { return x * x; };
    const auto r = solve_barenblatt(sq, 0.04, 0.25, PdeGrid::standard(0.25));
    CHECK(std::abs(r.value - 0.25) <= 1e-3);
    CHECK(closed_form_extremal(sq, Shape::Convex, 0.04, 0.25) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("closed-form extremal values")
{
    CHECK(std::abs(closed_form_extremal(pos, Shape::Convex, 0.04, 0.25) - kCall) <= 1e-8);
    CHECK(std::abs(closed_form_extremal(neg_abs, Shape::Concave, 0.04, 0.25) - kNegAbs) <= 1e-8);
    for (auto shape : {Shape::Convex, Shape::Concave})
        CHECK(closed_form_extremal([](double) { return 1.7; }, shape, 0.04, 0.25) == doctest::Approx(1.7));
}

TEST_CASE("pde oracle agrees with the closed form")
{
    const auto grid = PdeGrid::standard(0.25);
    CHECK(std::abs(solve_barenblatt(pos, 0.04, 0.25, grid).value - closed_form_extremal(pos, Shape::Convex, 0.04, 0.25)) <=
          1e-3);
    CHECK(std::abs(solve_barenblatt(neg_abs, 0.04, 0.25, grid).value -
                   closed_form_extremal(neg_abs, Shape::Concave, 0.04, 0.25)) <= 1e-3);
}

TEST_CASE("richardson estimate shrinks under refinement")
{
    PdeGrid g = PdeGrid::standard(0.25);
    g.nx = 101;
    g.nt = 100;
    const auto coarse = solve_barenblatt_richardson(pos, 0.04, 0.25, g);
    const auto fine = solve_barenblatt_richardson(pos, 0.04, 0.25, g.refined());
    CHECK(fine.richardson_error < coarse.richardson_error);
    CHECK(std::abs(fine.value - kCall) < std::abs(coarse.value - kCall) + 1e-9);
}

TEST_CASE("comparison principle")
{
    const auto grid = PdeGrid::standard(0.25);
    const auto low = solve_barenblatt([](double x) { return std::max(x - 0.1, 0.0); }, 0.04, 0.25, grid).value;
    const auto high = solve_barenblatt(pos, 0.04, 0.25, grid).value;
    const auto higher = solve_barenblatt([](double x) { return std::max(x, 0.0) + 0.05 * std::sin(x) + 0.05; },
                                         0.04, 0.25, grid)
                            .value;
    CHECK(low <= high);
    CHECK(high <= higher);
}

TEST_CASE("non-convex payoffs sit between the extremal prices")
{
    const auto g = [](double x) { return std::sin(3.0 * x); };
    const auto grid = PdeGrid::standard(0.25);
    const double v = solve_barenblatt(g, 0.04, 0.25, grid).value;
    const double lo = closed_form_extremal(g, Shape::Convex, 0.04, 0.04);
    const double hi = closed_form_extremal(g, Shape::Convex, 0.25, 0.25);
    CHECK(v >= std::min(lo, hi) - 1e-9);
    // a mixed payoff beats both constant-volatility prices
    const auto mix = [](double x) { return std::abs(x) - 2.0 * std::max(std::abs(x) - 0.3, 0.0); };
    const double vm = solve_barenblatt(mix, 0.04, 0.25, grid).value;
    CHECK(vm >= closed_form_extremal(mix, Shape::Convex, 0.04, 0.04) - 1e-4);
    CHECK(vm >= closed_form_extremal(mix, Shape::Convex, 0.25, 0.25) - 1e-4);
}

TEST_CASE("explicit scheme stability is enforced")
{
    PdeGrid g = PdeGrid::standard(0.25);
    g.theta = 0.0;
    CHECK_THROWS_AS(solve_barenblatt(pos, 0.04, 0.25, g), ValidationError);
    g.nx = 101;
    g.nt = 20000;
    CHECK(std::abs(solve_barenblatt(pos, 0.04, 0.25, g).value - kCall) <= 2e-3);
}

TEST_CASE("oracle input validation")
{
    CHECK_THROWS_AS(solve_barenblatt(pos, 0.3, 0.25, PdeGrid::standard(0.25)), ValidationError);
    PdeGrid g;
    g.nx = 3;
    CHECK_THROWS_AS(solve_barenblatt(pos, 0.04, 0.25, g), ValidationError);
    CHECK_THROWS_AS(shape_from_string("saddle"), ValidationError);
    CHECK(shape_from_string("concave") == Shape::Concave);
}
