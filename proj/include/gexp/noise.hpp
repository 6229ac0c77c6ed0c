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
#include <string>
#include <variant>
#include <vector>

#include "gexp/counter_rng.hpp"
#include "gexp/sym_matrix.hpp"

namespace gexp {

struct StandardNormal {
    int dim = 1;
};

// Each coordinate independently +-1 with probability 1/2.
struct Rademacher {
    int dim = 1;
};

struct FiniteSupport {
    std::vector<Vec> points;
    std::vector<double> probabilities;
};

// Nodes and weights realizing integrals against the noise law.
struct QuadratureRule {
    std::vector<Vec> nodes;
    std::vector<double> weights;
    int exactness_degree = 0;

    int size() const { return static_cast<int>(nodes.size()); }
    int dim() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().size()); }
};

/// The i.i.d. driving law of the discrete martingales.
class NoiseDistribution {
public:
    using Variant = std::variant<StandardNormal, Rademacher, FiniteSupport>;

    explicit NoiseDistribution(Variant v);

    static NoiseDistribution normal(int dim) { return NoiseDistribution(StandardNormal{dim}); }
    static NoiseDistribution rademacher(int dim) { return NoiseDistribution(Rademacher{dim}); }
    static NoiseDistribution finite(std::vector<Vec> points, std::vector<double> probabilities);

    const Variant& variant() const { return v_; }
    int dim() const { return dim_; }
    std::string kind_name() const;
    bool has_finite_support() const { return !std::holds_alternative<StandardNormal>(v_); }
    bool is_standard_normal() const { return std::holds_alternative<StandardNormal>(v_); }

    // Atoms of a finite-support law in a fixed order (Rademacher: sign
    // patterns with the first coordinate most significant, -1 before +1).
    const QuadratureRule& atoms() const;

    // One draw. For finite-support laws `atom_index` receives the index
    // into atoms(); for the normal law it is set to -1.
    Vec draw(CounterStream& stream, int* atom_index = nullptr) const;

    // log of the moment generating function at y.
    double log_mgf(const Vec& y) const;

private:
    Variant v_;
    int dim_ = 1;
    QuadratureRule atoms_;
};

// Probabilists' Gauss-Hermite rule for N(0,1), weights summing to one.
QuadratureRule gauss_hermite(int order);

/// Quadrature for the law: exact atoms for finite-support laws, tensorized
/// Gauss-Hermite with `order` nodes per axis for the normal law.
QuadratureRule quadrature(const NoiseDistribution& nu, int order);

inline constexpr int kDefaultQuadratureOrder = 9;

struct MomentReport {
    Vec mean;
    Eigen::MatrixXd covariance;
    double third_abs_moment = 0.0; // E ||x||^3 in the sup norm
    bool sampled = false;
    std::int64_t draws = 0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

// Exact check of zero mean and identity covariance (tolerance 1e-10).
MomentReport validate_moments(const NoiseDistribution& nu);

// Monte Carlo version: each moment must lie within 4 standard errors.
MomentReport validate_moments_sampled(const NoiseDistribution& nu, std::uint64_t seed, std::int64_t draws = 1'000'000);

struct MgfReport {
    double radius = 0.0;
    int n_max = 0;
    double max_value = 0.0; // max of psi(y / sqrt n)^n over the probed grid
    int argmax_n = 0;
    double threshold = 0.0; // exp(radius^2 d) * 10
    bool overflow = false;
    bool pass = false;
    std::string scope; // what was actually probed
};

/// Probes sup_n sup_{|y| <= radius} psi(y / sqrt n)^n on n = 1, 2, 4, ..., n_max
/// and a grid over the sup-norm ball.
MgfReport validate_mgf_bound(const NoiseDistribution& nu, double radius, int n_max);

// Draw j comes from stream (seed, j).
std::vector<Vec> sample(const NoiseDistribution& nu, std::uint64_t seed, std::int64_t count);

} // namespace gexp
