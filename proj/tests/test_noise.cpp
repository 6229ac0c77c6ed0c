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
#include <set>

#include "gexp/counter_rng.hpp"
#include "gexp/errors.hpp"
#include "gexp/noise.hpp"

using namespace gexp;

namespace {

Vec v1(double x)
{
    Vec v(1);
    v << x;
    return v;
}

// E Z^k for a standard normal
double normal_moment(int k)
{
    if (k % 2) return 0.0;
    double m = 1.0;
    for (int j = k - 1; j > 0; j -= 2) m *= j;
    return m;
}

} // namespace

TEST_CASE("philox known-answer vectors")
{
    const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    const auto ones = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    const auto pi = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams are independent of call order")
{
    CounterStream a(7, 3), b(7, 3), c(7, 4);
    std::vector<std::uint64_t> xa, xc;
    for (int i = 0; i < 10; ++i) xa.push_back(a.next_u64());
    for (int i = 0; i < 10; ++i) CHECK(b.next_u64() == xa[i]);
    for (int i = 0; i < 10; ++i) xc.push_back(c.next_u64());
    CHECK(xa != xc);
}

TEST_CASE("uniforms lie strictly inside the unit interval")
{
    CounterStream s(1, 0);
    int outside = 0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        if (!(u > 0.0 && u < 1.0)) ++outside;
    }
    CHECK(outside == 0);
}

TEST_CASE("normal draws have unit variance")
{
    CounterStream s(2, 0);
    const int m = 400000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < m; ++i) {
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / m) < 4.0 / std::sqrt(m));
    CHECK(std::abs(sq / m - 1.0) < 4.0 * std::sqrt(2.0 / m));
}

TEST_CASE("moment validation on the canonical laws")
{
    for (int d : {1, 2, 3}) {
        CHECK(validate_moments(NoiseDistribution::normal(d)).pass);
        CHECK(validate_moments(NoiseDistribution::rademacher(d)).pass);
    }
    const auto r = validate_moments(NoiseDistribution::rademacher(1));
    CHECK(r.third_abs_moment == doctest::Approx(1.0).epsilon(1e-14));
    const auto n = validate_moments(NoiseDistribution::normal(2));
    CHECK(n.mean.norm() < 1e-12);
    CHECK((n.covariance - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::isfinite(n.third_abs_moment));
}

TEST_CASE("moment validation rejects a law with nonzero mean")
{
    const auto nu = NoiseDistribution::finite({v1(1.0), v1(-0.5)}, {0.5, 0.5});
    const auto r = validate_moments(nu);
    CHECK_FALSE(r.pass);
    CHECK(r.mean(0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("sampled moment validation")
{
    CHECK(validate_moments_sampled(NoiseDistribution::normal(2), 9, 1'000'000).pass);
    CHECK(validate_moments_sampled(NoiseDistribution::rademacher(1), 9, 1'000'000).pass);
    CHECK_FALSE(validate_moments_sampled(NoiseDistribution::finite({v1(1.0), v1(-0.5)}, {0.5, 0.5}), 9, 1'000'000)
                    .pass);
}

TEST_CASE("finite support probabilities are validated")
{
    CHECK_THROWS_AS(NoiseDistribution::finite({v1(1), v1(-1)}, {0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(NoiseDistribution::finite({v1(1), v1(-1)}, {1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(NoiseDistribution::finite({v1(1)}, {0.5, 0.5}), ValidationError);
}

TEST_CASE("gaussian mgf bound is attained")
{
    const auto r = validate_mgf_bound(NoiseDistribution::normal(1), 2.0, 64);
    CHECK(r.pass);
    CHECK(r.max_value == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    CHECK_FALSE(r.scope.empty());
}

TEST_CASE("rademacher mgf stays below the gaussian bound")
{
    const auto r = validate_mgf_bound(NoiseDistribution::rademacher(1), 2.0, 64);
    CHECK(r.pass);
    CHECK(r.max_value <= std::exp(2.0));
    // independent: cosh(2/sqrt(n))^n at the largest probed n
    CHECK(r.max_value == doctest::Approx(std::pow(std::cosh(2.0 / 8.0), 64)).epsilon(1e-12));
}

TEST_CASE("mgf bound holds for bounded atoms and flags overflow")
{
    const auto nu = NoiseDistribution::finite({v1(std::sqrt(2.0)), v1(-std::sqrt(2.0)), v1(0.0)}, {0.25, 0.25, 0.5});
    CHECK(validate_mgf_bound(nu, 1.5, 32).pass);
    const auto big = validate_mgf_bound(NoiseDistribution::normal(1), 40.0, 4);
    CHECK(big.overflow);
    CHECK_FALSE(big.pass);
}

TEST_CASE("rademacher quadrature is the atom set")
{
    const auto q = quadrature(NoiseDistribution::rademacher(1), 7);
    REQUIRE(q.size() == 2);
    CHECK(q.nodes[0](0) == -1.0);
    CHECK(q.nodes[1](0) == 1.0);
    CHECK(q.weights[0] == 0.5);
    CHECK(q.weights[1] == 0.5);
}

TEST_CASE("gauss-hermite order 5 moments")
{
    const auto q = quadrature(NoiseDistribution::normal(1), 5);
    CHECK(q.exactness_degree == 9);
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < q.size(); ++i) {
        m2 += q.weights[i] * std::pow(q.nodes[i](0), 2);
        m4 += q.weights[i] * std::pow(q.nodes[i](0), 4);
    }
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gauss-hermite integrates polynomials up to its exactness degree")
{
    for (int order : {2, 3, 5, 9, 12}) {
        const auto q = gauss_hermite(order);
        for (int k = 0; k <= 2 * order - 1; ++k) {
            double s = 0.0, scale = 0.0;
            for (int i = 0; i < q.size(); ++i) {
                s += q.weights[i] * std::pow(q.nodes[i](0), k);
                scale += q.weights[i] * std::pow(std::abs(q.nodes[i](0)), k);
            }
            CHECK_MESSAGE(std::abs(s - normal_moment(k)) <= 1e-10 * std::max(1.0, scale),
                          "order " << order << " degree " << k);
        }
    }
}

TEST_CASE("tensor gauss-hermite in two dimensions")
{
    const auto q = quadrature(NoiseDistribution::normal(2), 3);
    CHECK(q.size() == 9);
    double w = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (int i = 0; i < q.size(); ++i) {
        w += q.weights[i];
        mean += q.weights[i] * q.nodes[i];
        cov += q.weights[i] * q.nodes[i] * q.nodes[i].transpose();
        CHECK(q.weights[i] > 0.0);
    }
    CHECK(std::abs(w - 1.0) < 1e-12);
    CHECK(mean.norm() < 1e-10);
    CHECK((cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("quadrature rejects order below two")
{
    CHECK_THROWS_AS(quadrature(NoiseDistribution::normal(1), 1), ValidationError);
}

TEST_CASE("sampling is deterministic and centered")
{
    const auto nu = NoiseDistribution::rademacher(1);
    CHECK(sample(nu, 3, 0).empty());
    const auto a = sample(nu, 3, 1'000'000);
    const auto b = sample(nu, 3, 1'000'000);
    CHECK(a == b);
    double sum = 0.0;
    std::set<double> values;
    for (const auto& x : a) {
        sum += x(0);
        values.insert(x(0));
    }
    CHECK(std::abs(sum / a.size()) < 4.0 / std::sqrt(1e6));
    CHECK(values == std::set<double>{-1.0, 1.0});
}

TEST_CASE("monte carlo agrees with quadrature for a bounded test function")
{
    const auto nu = NoiseDistribution::normal(1);
    auto f = [](double x) { return std::cos(x) + 0.3 * std::tanh(x); };
    const auto q = quadrature(nu, 20);
    double exact = 0.0;
    for (int i = 0; i < q.size(); ++i) exact += q.weights[i] * f(q.nodes[i](0));
    const auto xs = sample(nu, 17, 1'000'000);
    double s = 0.0, sq = 0.0;
    for (const auto& x : xs) {
        const double y = f(x(0));
        s += y;
        sq += y * y;
    }
    const double m = s / xs.size();
    const double se = std::sqrt((sq / xs.size() - m * m) / xs.size());
    CHECK(std::abs(m - exact) <= 4 * se);
    CHECK(exact == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("atom indices follow tensor order")
{
    const auto nu = NoiseDistribution::rademacher(2);
    const auto& atoms = nu.atoms();
    REQUIRE(atoms.size() == 4);
    CounterStream s(4, 0);
    for (int i = 0; i < 64; ++i) {
        int idx = -1;
        const Vec x = nu.draw(s, &idx);
        REQUIRE(idx >= 0);
        CHECK(x == atoms.nodes[idx]);
    }
    CHECK(atoms.nodes[0] == Eigen::Vector2d(-1, -1));
    CHECK(atoms.nodes[1] == Eigen::Vector2d(-1, 1));
    CHECK(atoms.nodes[2] == Eigen::Vector2d(1, -1));
}
