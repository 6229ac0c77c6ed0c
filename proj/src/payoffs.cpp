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

#include "gexp/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gexp/counter_rng.hpp"
#include "gexp/errors.hpp"

namespace gexp {

std::string to_string(MarkovKind k)
{
    switch (k) {
    case MarkovKind::None: return "none";
    case MarkovKind::Terminal: return "terminal";
    case MarkovKind::TerminalPlusRunningMax: return "terminal_plus_running_max";
    case MarkovKind::PathAverage: return "path_average";
    }
    return "none";
}

PayoffFunctional::PayoffFunctional(std::string name, int dim, Evaluator eval, double h1, double h2,
                                   std::optional<double> bound, std::optional<MarkovReduction> markov)
    : name_(std::move(name)), dim_(dim), eval_(std::move(eval)), h1_(h1), h2_(h2), bound_(bound),
      markov_(std::move(markov))
{
    if (dim_ < 1) throw ValidationError("payoff: dim must be positive");
    if (!eval_) throw ValidationError("payoff: evaluator is empty");
    if (!(h1_ > 0.0) || !(h2_ >= 0.0)) throw ValidationError("payoff: requires H1 > 0 and H2 >= 0");
    if (markov_ && markov_->kind == MarkovKind::None) markov_.reset();
    if (markov_ && !markov_->terminal) throw ValidationError("payoff: Markov reduction without terminal function");
}

double PayoffFunctional::evaluate(const InterpolatedPath& path) const
{
    if (path.dim() != dim_) throw DimensionError("payoff '" + name_ + "': path dimension mismatch");
    const double y = eval_(path);
    if (!std::isfinite(y)) throw ComputationError("payoff '" + name_ + "': non-finite value");
    return y;
}

PayoffFunctional PayoffFunctional::with_constants(double h1, double h2) const
{
    return PayoffFunctional(name_, dim_, eval_, h1, h2, bound_, markov_);
}

namespace {

std::optional<MarkovReduction> combine_markov(const std::optional<MarkovReduction>& a,
                                              const std::optional<MarkovReduction>& b)
{
    if (!a || !b) return std::nullopt;
    MarkovKind kind;
    if (a->kind == b->kind) kind = a->kind;
    else if (a->kind == MarkovKind::Terminal) kind = b->kind;
    else if (b->kind == MarkovKind::Terminal) kind = a->kind;
    else return std::nullopt;
    MarkovReduction r;
    r.kind = kind;
    r.uses_qv = a->uses_qv || b->uses_qv;
    const bool aq = a->uses_qv, bq = b->uses_qv;
    r.terminal = [fa = a->terminal, fb = b->terminal, aq, bq](std::span<const double> u, std::span<const double> v,
                                                            double extra) {
        return fa(u, aq ? v : std::span<const double>{}, extra) + fb(u, bq ? v : std::span<const double>{}, extra);
    };
    return r;
}

} // namespace

PayoffFunctional operator+(const PayoffFunctional& a, const PayoffFunctional& b)
{
    if (a.dim_ != b.dim_) throw DimensionError("payoff sum: dimension mismatch");
    std::optional<double> bound;
    if (a.bound_ && b.bound_) bound = *a.bound_ + *b.bound_;
    return PayoffFunctional("(" + a.name_ + "+" + b.name_ + ")", a.dim_,
                            [ea = a.eval_, eb = b.eval_](const InterpolatedPath& p) { return ea(p) + eb(p); },
                            a.h1_ + b.h1_, std::max(a.h2_, b.h2_), bound, combine_markov(a.markov_, b.markov_));
}

PayoffFunctional operator*(double s, const PayoffFunctional& a)
{
    std::optional<double> bound;
    if (a.bound_) bound = std::abs(s) * *a.bound_;
    std::optional<MarkovReduction> m = a.markov_;
    if (m) {
        m->terminal = [f = a.markov_->terminal, s](std::span<const double> u, std::span<const double> v, double e) {
            return s * f(u, v, e);
        };
    }
    const double h1 = std::max(std::abs(s) * a.h1_, std::numeric_limits<double>::min());
    return PayoffFunctional(std::to_string(s) + "*" + a.name_, a.dim_,
                            [e = a.eval_, s](const InterpolatedPath& p) { return s * e(p); }, h1, a.h2_, bound, m);
}

Vec StockTrajectory::at(double t) const
{
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("StockTrajectory: t must lie in [0, 1]");
    const int n = static_cast<int>(knots.size()) - 1;
    const double nt = n * t;
    const int k = std::min(static_cast<int>(std::floor(nt)), n - 1);
    const double w = nt - k;
    return (1.0 - w) * knots[k] + w * knots[k + 1];
}

StockTrajectory stock_path(const InterpolatedPath& path, const Vec& s0, StockConvention convention)
{
    if (s0.size() != path.dim()) throw DimensionError("stock_path: s0 dimension mismatch");
    if ((s0.array() <= 0.0).any()) throw ValidationError("stock_path: s0 must be positive");
    const double c = convention == StockConvention::Unit ? 1.0 : 0.5;
    StockTrajectory s;
    for (int k = 0; k <= path.steps(); ++k) {
        Vec x(path.dim());
        for (int i = 0; i < path.dim(); ++i) x(i) = s0(i) * std::exp(path.u_knot(k)(i) - c * path.v_knot(k)(i, i));
        s.knots.push_back(std::move(x));
    }
    return s;
}

namespace payoffs {

namespace {

MarkovReduction terminal_reduction(bool uses_qv,
                                   std::function<double(std::span<const double>, std::span<const double>, double)> f)
{
    return MarkovReduction{MarkovKind::Terminal, uses_qv, std::move(f)};
}

} // namespace

PayoffFunctional constant(double c, int dim)
{
    return PayoffFunctional(
        "constant", dim, [c](const InterpolatedPath&) { return c; }, 1.0, 0.0, std::abs(c),
        terminal_reduction(false, [c](std::span<const double>, std::span<const double>, double) { return c; }));
}

PayoffFunctional terminal_linear(double a, int dim)
{
    return PayoffFunctional(
        "linear", dim, [a](const InterpolatedPath& p) { return a * p.u_final()(0); },
        std::max(std::abs(a), std::numeric_limits<double>::min()), 0.0, std::nullopt,
        terminal_reduction(false, [a](std::span<const double> u, std::span<const double>, double) { return a * u[0]; }));
}

PayoffFunctional terminal_call(double strike, int dim)
{
    return PayoffFunctional(
        "call", dim, [strike](const InterpolatedPath& p) { return std::max(p.u_final()(0) - strike, 0.0); }, 1.0, 0.0,
        std::nullopt, terminal_reduction(false, [strike](std::span<const double> u, std::span<const double>, double) {
            return std::max(u[0] - strike, 0.0);
        }));
}

PayoffFunctional terminal_square(int dim)
{
    // |x^2 - y^2| <= (|x| + |y|) |x - y| <= exp(|x| + |y|) |x - y|
    return PayoffFunctional(
        "square", dim, [](const InterpolatedPath& p) { return p.u_final()(0) * p.u_final()(0); }, 1.0, 1.0,
        std::nullopt,
        terminal_reduction(false, [](std::span<const double> u, std::span<const double>, double) { return u[0] * u[0]; }));
}

PayoffFunctional terminal_neg_abs(int dim)
{
    return PayoffFunctional(
        "neg_abs", dim, [](const InterpolatedPath& p) { return -std::abs(p.u_final()(0)); }, 1.0, 0.0, std::nullopt,
        terminal_reduction(false, [](std::span<const double> u, std::span<const double>, double) { return -std::abs(u[0]); }));
}

PayoffFunctional qv_trace(int dim)
{
    return PayoffFunctional(
        "qv_trace", dim, [](const InterpolatedPath& p) { return p.v_final().trace(); }, static_cast<double>(dim), 0.0,
        std::nullopt, terminal_reduction(true, [](std::span<const double>, std::span<const double> v, double) {
            double s = 0.0;
            for (double x : v) s += x;
            return s;
        }));
}

PayoffFunctional stock_call(double s0, double strike, StockConvention convention, int dim)
{
    if (!(s0 > 0.0)) throw ValidationError("stock_call: s0 must be positive");
    const double c = convention == StockConvention::Unit ? 1.0 : 0.5;
    // |e^a - e^b| <= e^{|a|+|b|} |a - b| with |a| <= |u| + |v|
    return PayoffFunctional(
        convention == StockConvention::Unit ? "stock_call" : "stock_call_half", dim,
        [s0, strike, c](const InterpolatedPath& p) {
            return std::max(s0 * std::exp(p.u_final()(0) - c * p.v_final()(0, 0)) - strike, 0.0);
        },
        s0, 1.0, std::nullopt,
        terminal_reduction(true, [s0, strike, c](std::span<const double> u, std::span<const double> v, double) {
            return std::max(s0 * std::exp(u[0] - c * v[0]) - strike, 0.0);
        }));
}

PayoffFunctional lookback_call(double strike, int dim)
{
    return PayoffFunctional(
        "lookback_call", dim,
        [strike](const InterpolatedPath& p) {
            double m = 0.0;
            for (int k = 0; k <= p.steps(); ++k) m = std::max(m, p.u_knot(k)(0));
            return std::max(m - strike, 0.0);
        },
        1.0, 0.0, std::nullopt,
        MarkovReduction{MarkovKind::TerminalPlusRunningMax, false,
                        [strike](std::span<const double>, std::span<const double>, double m) {
                            return std::max(m - strike, 0.0);
                        }});
}

PayoffFunctional asian_call(double strike, int dim)
{
    return PayoffFunctional(
        "asian_call", dim,
        [strike](const InterpolatedPath& p) {
            double a = 0.0;
            const double h = 0.5 / p.steps();
            for (int k = 0; k < p.steps(); ++k) a += h * (p.u_knot(k)(0) + p.u_knot(k + 1)(0));
            return std::max(a - strike, 0.0);
        },
        1.0, 0.0, std::nullopt,
        MarkovReduction{MarkovKind::PathAverage, false,
                        [strike](std::span<const double>, std::span<const double>, double a) {
                            return std::max(a - strike, 0.0);
                        }});
}

PayoffFunctional sup_norm_payoff(int dim)
{
    return PayoffFunctional(
        "sup_norm", dim, [](const InterpolatedPath& p) { return sup_norm(p).first; }, 1.0, 0.0);
}

} // namespace payoffs

namespace {

DiscretePathPair random_pair(int n, int d, double amplitude, const ControlGrid& grid, CounterStream& rng)
{
    DiscretePathPair p = DiscretePathPair::zeros(n, d);
    const double sq = std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) {
        const int c = static_cast<int>(rng.uniform() * grid.size());
        Vec z(d);
        for (int i = 0; i < d; ++i) z(i) = rng.normal();
        p.u[k + 1] = p.u[k] + amplitude * (grid.controls[c].matrix() * z) / sq;
        p.v[k + 1] = p.v[k] + grid.squares[c] * (1.0 / n);
    }
    return p;
}

} // namespace

CheckReport lipschitz_bound_check(const PayoffFunctional& f, int trials, std::uint64_t seed,
                                  const UncertaintyDomain& domain)
{
    if (trials < 1) throw ValidationError("lipschitz_bound_check: trials must be >= 1");
    if (domain.dim() != f.dim()) throw DimensionError("lipschitz_bound_check: domain dimension mismatch");
    const int d = f.dim();
    const ControlGrid grid = sqrt_grid(domain, 8);
    CheckReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        CounterStream rng(seed, static_cast<std::uint64_t>(t));
        const int n = 1 + static_cast<int>(rng.uniform() * 12);
        const double amp = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
        DiscretePathPair a = random_pair(n, d, amp, grid, rng);
        DiscretePathPair b;
        const double mode = rng.uniform();
        if (mode < 0.5) {
            b = random_pair(n, d, amp, grid, rng);
        } else {
            // small perturbation of the martingale path, QV path shared or redrawn
            const double eps = std::pow(10.0, -4.0 + 4.0 * rng.uniform());
            DiscretePathPair delta = random_pair(n, d, eps, grid, rng);
            b = a;
            for (int k = 1; k <= n; ++k) b.u[k] += delta.u[k];
            if (mode < 0.75) b.v = delta.v;
        }
        const InterpolatedPath pa(std::move(a)), pb(std::move(b));
        const double lhs = std::abs(f.evaluate(pa) - f.evaluate(pb));
        const auto [ua, va] = sup_norm(pa);
        const auto [ub, vb] = sup_norm(pb);
        double du = 0.0, dv = 0.0;
        for (int k = 0; k <= n; ++k) {
            du = std::max(du, sup_norm(Vec(pa.u_knot(k) - pb.u_knot(k))));
            dv = std::max(dv, operator_norm(pa.v_knot(k) - pb.v_knot(k)));
        }
        const double rhs = f.h1() * std::exp(f.h2() * (ua + ub + va + vb)) * (du + dv);
        double ratio;
        if (lhs == 0.0) ratio = 0.0;
        else if (rhs == 0.0) ratio = std::numeric_limits<double>::infinity();
        else ratio = lhs / rhs;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.pass = rep.max_ratio <= 1.0 + 1e-9;
    return rep;
}

CheckReport lipschitz_bound_check(const PayoffFunctional& f, int trials, std::uint64_t seed)
{
    return lipschitz_bound_check(f, trials, seed, UncertaintyDomain::isotropic(f.dim(), 0.0, 1.0));
}

} // namespace gexp
