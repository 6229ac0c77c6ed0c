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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gexp/path_space.hpp"
#include "gexp/uncertainty_domain.hpp"

namespace gexp {

// What a payoff depends on, declared by its author.
enum class MarkovKind {
    None,                   // full history
    Terminal,               // (u(1), v(1))
    TerminalPlusRunningMax, // additionally max_t u^1(t)
    PathAverage,            // additionally int_0^1 u^1(t) dt
};

std::string to_string(MarkovKind k);

// Terminal value of a payoff expressed on the reduced lattice state.
// `v_diag` holds the diagonal of v(1) (empty when uses_qv is false);
// `extra` is the running max or path integral of the first coordinate.
struct MarkovReduction {
    MarkovKind kind = MarkovKind::Terminal;
    bool uses_qv = true;
    std::function<double(std::span<const double> u, std::span<const double> v_diag, double extra)> terminal;
};

/// F(u, v) on interpolated path pairs, with the growth constants of its
/// exponential-Lipschitz bound
///     |F(u1,v1) - F(u2,v2)| <= H1 exp(H2 (|u1|+|u2|+|v1|+|v2|)) (|u1-u2| + |v1-v2|).
class PayoffFunctional {
public:
    using Evaluator = std::function<double(const InterpolatedPath&)>;

    PayoffFunctional(std::string name, int dim, Evaluator eval, double h1, double h2,
                     std::optional<double> bound = std::nullopt, std::optional<MarkovReduction> markov = std::nullopt);

    // Throws DimensionError on a dimension mismatch and ComputationError on a
    // non-finite result.
    double evaluate(const InterpolatedPath& path) const;

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double h1() const { return h1_; }
    double h2() const { return h2_; }
    const std::optional<double>& bound() const { return bound_; }
    MarkovKind markov_kind() const { return markov_ ? markov_->kind : MarkovKind::None; }
    const std::optional<MarkovReduction>& markov() const { return markov_; }

    PayoffFunctional with_constants(double h1, double h2) const;

    // Pointwise combinations; growth constants are combined conservatively
    // and the Markov reduction is kept when both sides share the kind.
    friend PayoffFunctional operator+(const PayoffFunctional& a, const PayoffFunctional& b);
    friend PayoffFunctional operator*(double s, const PayoffFunctional& a);

private:
    std::string name_;
    int dim_;
    Evaluator eval_;
    double h1_;
    double h2_;
    std::optional<double> bound_;
    std::optional<MarkovReduction> markov_;
};

// Stock model exponent convention: S = s0 exp(B - c <B>).
enum class StockConvention {
    Unit, // c = 1
    Half, // c = 1/2
};

// Stock prices at the knots; piecewise linear in between.
struct StockTrajectory {
    std::vector<Vec> knots;
    Vec at(double t) const;
};

/// S^i = s0^i exp(u^i - c v^{ii}) at every knot.
StockTrajectory stock_path(const InterpolatedPath& path, const Vec& s0, StockConvention convention = StockConvention::Unit);

namespace payoffs {

PayoffFunctional constant(double c, int dim = 1);
// g(x) = a x^1 at t = 1.
PayoffFunctional terminal_linear(double a, int dim = 1);
// (u^1(1) - K)^+.
PayoffFunctional terminal_call(double strike, int dim = 1);
// (u^1(1))^2.
PayoffFunctional terminal_square(int dim = 1);
// -|u^1(1)|.
PayoffFunctional terminal_neg_abs(int dim = 1);
// trace v(1).
PayoffFunctional qv_trace(int dim = 1);
// (S^1(1) - K)^+ for the exponential stock model.
PayoffFunctional stock_call(double s0, double strike, StockConvention convention, int dim = 1);
// (max_t u^1(t) - K)^+.
PayoffFunctional lookback_call(double strike, int dim = 1);
// (int_0^1 u^1(t) dt - K)^+.
PayoffFunctional asian_call(double strike, int dim = 1);
// ||u||_sup; full-history, no Markov reduction.
PayoffFunctional sup_norm_payoff(int dim = 1);

} // namespace payoffs

struct CheckReport {
    int trials = 0;
    double max_ratio = 0.0; // max |dF| / (declared right-hand side)
    bool pass = false;
};

/// Samples pairs of random piecewise-linear path pairs (martingale increments
/// of size 1/sqrt(n) at random amplitudes, QV increments in D / n) and
/// compares both sides of the exponential-Lipschitz bound.
CheckReport lipschitz_bound_check(const PayoffFunctional& f, int trials, std::uint64_t seed,
                                  const UncertaintyDomain& domain);
CheckReport lipschitz_bound_check(const PayoffFunctional& f, int trials, std::uint64_t seed);

} // namespace gexp
