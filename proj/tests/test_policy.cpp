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
#include <sstream>

#include "gexp/errors.hpp"
#include "gexp/policy_process.hpp"

using namespace gexp;

namespace {

const auto kRad = NoiseDistribution::rademacher(1);
const auto kNormal = NoiseDistribution::normal(1);
const UncertaintyDomain kD = UncertaintyDomain::scalar(0.04, 0.25);

bool same(const SimulationEstimate& a, const SimulationEstimate& b)
{
    return a.mean == b.mean && a.stderr_ == b.stderr_ && a.n_paths == b.n_paths &&
           a.failed_paths == b.failed_paths && a.terminal_mean == b.terminal_mean &&
           a.max_qv_mismatch == b.max_qv_mismatch && a.inadmissible_steps == b.inadmissible_steps;
}

ValueAndPolicy normal_lattice(const PayoffFunctional& f, const UncertaintyDomain& d, int n)
{
    return solve_lattice(f, d, sqrt_grid(d, 4), kNormal, quadrature(kNormal, 9), n);
}

} // namespace

TEST_CASE("singleton square payoff has unit mean")
{
    const auto d = UncertaintyDomain::scalar(1, 1);
    const auto f = payoffs::terminal_square();
    const auto vp = solve_tree(f, d, sqrt_grid(d, 1), kRad, 4);
    const auto est = simulate_discrete(vp, kRad, f, 100000, 5);
    CHECK(est.valid);
    CHECK(std::abs(est.mean - 1.0) <= 3 * est.stderr_);
}

TEST_CASE("tree policy simulation reproduces the tree value")
{
    const auto f = payoffs::lookback_call(0.0);
    const auto vp = solve_tree(f, kD, sqrt_grid(kD, 3), kRad, 5);
    const auto est = simulate_discrete(vp, kRad, f, 100000, 17);
    CHECK(std::abs(est.mean - vp.value) <= 3 * est.stderr_);
}

TEST_CASE("simulation is deterministic and thread-count independent")
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = solve_tree(f, kD, sqrt_grid(kD, 2), kRad, 4);
    const auto a = simulate_discrete(vp, kRad, f, 20000, 3, Execution::Parallel);
    const auto b = simulate_discrete(vp, kRad, f, 20000, 3, Execution::Parallel);
    const auto c = simulate_discrete(vp, kRad, f, 20000, 3, Execution::Serial);
    CHECK(same(a, b));
    CHECK(same(a, c));
    const auto d = simulate_discrete(vp, kRad, f, 20000, 4);
    CHECK(d.mean != a.mean);

    const auto lat = normal_lattice(f, kD, 8);
    CHECK(same(simulate_continuous(lat, f, 4, 5000, 9, Execution::Serial),
               simulate_continuous(lat, f, 4, 5000, 9, Execution::Parallel)));
}

TEST_CASE("simulated martingale is centered and its variation matches the controls")
{
    const auto f = payoffs::terminal_call(0.05);
    const auto vp = solve_tree(f, kD, sqrt_grid(kD, 3), kRad, 5);
    const auto est = simulate_discrete(vp, kRad, f, 50000, 23);
    REQUIRE(est.terminal_mean.size() == 1);
    CHECK(std::abs(est.terminal_mean(0)) <= 4 * est.terminal_stderr(0));
    CHECK(est.max_qv_mismatch == 0.0);

    const auto lat = normal_lattice(f, kD, 8);
    const auto le = simulate_discrete(lat, kNormal, f, 50000, 23);
    CHECK(std::abs(le.terminal_mean(0)) <= 4 * le.terminal_stderr(0));
    CHECK(le.max_qv_mismatch == 0.0);
}

TEST_CASE("lattice policy simulation agrees with the lattice value")
{
    const auto f = payoffs::terminal_neg_abs();
    const auto vp = normal_lattice(f, kD, 8);
    const auto est = simulate_discrete(vp, kNormal, f, 100000, 31);
    CHECK(est.valid);
    CHECK(std::abs(est.mean - vp.value) <= 3 * est.stderr_ + 2e-3);
}

TEST_CASE("two-dimensional lattice policy simulation")
{
    const auto d = UncertaintyDomain::diagonal({0.04, 0.09}, {0.25, 0.36});
    const auto nu = NoiseDistribution::rademacher(2);
    const auto f = payoffs::terminal_call(0.0, 2);
    const auto vp = solve_lattice(f, d, sqrt_grid(d, 1), nu, quadrature(nu, 2), 4);
    const auto est = simulate_discrete(vp, nu, f, 50000, 2);
    CHECK(est.terminal_mean.size() == 2);
    CHECK(std::abs(est.mean - vp.value) <= 3 * est.stderr_ + 2e-3);
}

TEST_CASE("estimates tighten around the value as paths grow")
{
    const auto f = payoffs::asian_call(0.0);
    const auto vp = solve_tree(f, kD, sqrt_grid(kD, 2), kRad, 4);
    double previous = 1e9;
    for (std::int64_t paths : {10'000, 100'000, 1'000'000}) {
        const auto est = simulate_discrete(vp, kRad, f, paths, 77);
        CHECK(std::abs(est.mean - vp.value) <= 3 * est.stderr_);
        CHECK(est.stderr_ < previous);
        previous = est.stderr_;
    }
}

TEST_CASE("simulation preconditions")
{
    const auto f = payoffs::terminal_call(0.0);
    const auto tree = solve_tree(f, kD, sqrt_grid(kD, 2), kRad, 3);
    CHECK_THROWS_AS(simulate_discrete(tree, kNormal, f, 100, 1), ValidationError);
    CHECK_THROWS_AS(simulate_continuous(tree, f, 2, 100, 1), ValidationError);
    CHECK_THROWS_AS(simulate_discrete(tree, kRad, f, 1, 1), ValidationError);
    const auto lat = normal_lattice(f, kD, 4);
    CHECK_THROWS_AS(simulate_continuous(lat, f, 0, 100, 1), ValidationError);
}

TEST_CASE("constant volatility continuous simulation is scaled brownian motion")
{
    const auto d = UncertaintyDomain::scalar(0.09, 0.09);
    const auto f = payoffs::terminal_square();
    const auto vp = normal_lattice(f, d, 4);
    const auto est = simulate_continuous(vp, f, 8, 100000, 13);
    CHECK(std::abs(est.mean - 0.09) <= 3 * est.stderr_);
    CHECK(est.inadmissible_steps == 0);
    const auto qv = simulate_continuous(vp, payoffs::qv_trace(), 8, 1000, 13);
    CHECK(qv.mean == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("one substep reproduces the discrete simulation in law")
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = normal_lattice(f, kD, 8);
    const auto disc = simulate_discrete(vp, kNormal, f, 100000, 101);
    const auto cont = simulate_continuous(vp, f, 1, 100000, 202);
    const double joint = std::sqrt(disc.stderr_ * disc.stderr_ + cont.stderr_ * cont.stderr_);
    CHECK(std::abs(disc.mean - cont.mean) <= 3 * joint);
}

TEST_CASE("continuous measure stays admissible and below the continuous value")
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = normal_lattice(f, kD, 8);
    const auto est = simulate_continuous(vp, f, 8, 50000, 55);
    CHECK(est.inadmissible_steps == 0);
    CHECK(est.mean <= 0.5 / std::sqrt(2 * M_PI) + 3 * est.stderr_);
}

TEST_CASE("path dump writes the requested paths")
{
    const auto f = payoffs::terminal_call(0.0);
    const auto vp = solve_tree(f, kD, sqrt_grid(kD, 2), kRad, 3);
    std::ostringstream os;
    PathDump dump{&os, 5};
    simulate_discrete(vp, kRad, f, 100, 1, Execution::Parallel, dump);
    std::istringstream in(os.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line.rfind("path,k,t", 0) == 0);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5 * 4);

    const auto lat = normal_lattice(f, kD, 4);
    std::ostringstream oc;
    PathDump cd{&oc, 2};
    simulate_continuous(lat, f, 3, 10, 1, Execution::Serial, cd);
    std::istringstream ic(oc.str());
    rows = -1;
    while (std::getline(ic, line)) ++rows;
    CHECK(rows == 2 * 13);
}
