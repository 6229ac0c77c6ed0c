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

#include "gexp/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gexp/counter_rng.hpp"
#include "gexp/errors.hpp"
#include "gexp/kernels.hpp"

namespace gexp {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t m = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

void check_n_values(const std::vector<int>& ns, std::size_t min_count)
{
    if (ns.size() < min_count) {
        std::ostringstream msg;
        msg << "need at least " << min_count << " n values";
        throw ValidationError(msg.str());
    }
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw ValidationError("n values must be positive");
        if (i > 0 && ns[i] <= ns[i - 1]) throw ValidationError("n values must be strictly increasing");
    }
}

// Mean and standard error of per-path samples, order-fixed.
void mean_stderr(const std::vector<double>& x, double& mean, double& se)
{
    const double m = static_cast<double>(x.size());
    mean = kernels::pairwise_sum(x) / m;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
    se = m > 1 ? std::sqrt(kernels::pairwise_sum(sq) / (m - 1.0) / m) : 0.0;
}

void finish(ScalingReport& r)
{
    const std::size_t m = r.estimates.size();
    r.normalized.resize(m);
    bool positive = true;
    for (std::size_t i = 0; i < m; ++i) {
        r.normalized[i] = r.estimates[i] * std::pow(static_cast<double>(r.n_values[i]), r.normalization_exponent);
        positive = positive && r.estimates[i] > 0.0;
    }
    const auto [lo, hi] = std::minmax_element(r.normalized.begin(), r.normalized.end());
    r.bound_constant = *hi;
    if (positive) {
        std::vector<double> xs(r.n_values.begin(), r.n_values.end());
        r.slope = loglog_slope(xs, r.estimates);
        r.ratio = *hi / *lo;
        r.growth = r.normalized.back() / r.normalized.front();
    } else {
        // identically zero sequences are trivially bounded
        const bool all_zero = *hi == 0.0 && *lo == 0.0;
        r.ratio = all_zero ? 1.0 : std::numeric_limits<double>::infinity();
        r.growth = all_zero ? 1.0 : std::numeric_limits<double>::infinity();
    }
    if (r.failure.empty() && !(r.ratio <= r.ratio_limit)) {
        std::ostringstream msg;
        msg << "normalized max/min ratio " << r.ratio << " exceeds " << r.ratio_limit;
        r.failure = msg.str();
    }
    r.pass = r.failure.empty();
}

std::uint64_t stream_id(std::size_t n_index, std::int64_t path)
{
    return (static_cast<std::uint64_t>(n_index) << 40) | static_cast<std::uint64_t>(path);
}

template <class Body>
void for_paths(std::int64_t n_paths, Execution exec, Body&& body)
{
    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < n_paths; ++i) body(i);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n_paths; ++i) body(i);
}

} // namespace

DiscretizationReport discretization_scaling(double sigma, const std::vector<int>& n_values, std::int64_t n_paths,
                                            std::uint64_t seed, Execution exec)
{
    check_n_values(n_values, 3);
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("discretization_scaling: sigma must be >= 0");
    if (n_paths < 2) throw ValidationError("discretization_scaling: needs at least 2 paths");

    DiscretizationReport out;
    out.fourth_moment.quantity = "fourth_moment";
    out.fourth_moment.normalization_exponent = 1.0;
    out.qv_deviation.quantity = "qv_deviation";
    out.qv_deviation.normalization_exponent = 0.5;
    const double var = sigma * sigma;

    for (std::size_t j = 0; j < n_values.size(); ++j) {
        const int n = n_values[j];
        const int fine = kScalingOversampling;
        const double sqrt_dt = std::sqrt(1.0 / (static_cast<double>(n) * fine));
        std::vector<double> fourth(static_cast<std::size_t>(n_paths));
        std::vector<double> qv(static_cast<std::size_t>(n_paths));
        for_paths(n_paths, exec, [&](std::int64_t i) {
            CounterStream rng(seed, stream_id(j, i));
            double m = 0.0, worst = 0.0;
            for (int k = 0; k < n; ++k) {
                const double anchor = m;
                for (int s = 0; s < fine; ++s) {
                    m += sigma * sqrt_dt * rng.normal();
                    worst = std::max(worst, std::abs(m - anchor));
                }
            }
            fourth[i] = worst * worst * worst * worst;
            // <M>_t = var t and <N>_k = var k / n, so the deviation on
            // [k/n, (k+1)/n] peaks at var / n for every path
            const double dev = var / n;
            qv[i] = dev * dev;
        });
        double mean, se;
        mean_stderr(fourth, mean, se);
        out.fourth_moment.n_values.push_back(n);
        out.fourth_moment.estimates.push_back(mean);
        out.fourth_moment.stderrs.push_back(se);
        mean_stderr(qv, mean, se);
        out.qv_deviation.n_values.push_back(n);
        out.qv_deviation.estimates.push_back(mean);
        out.qv_deviation.stderrs.push_back(se);
    }
    finish(out.fourth_moment);
    finish(out.qv_deviation);
    return out;
}

ScalingReport exp_moment_probe(const UncertaintyDomain& domain, const NoiseDistribution& nu, double a,
                               const std::vector<int>& n_values, std::int64_t n_paths, std::uint64_t seed,
                               Execution exec)
{
    check_n_values(n_values, 2);
    if (!(a > 0.0)) throw ValidationError("exp_moment_probe: A must be > 0");
    if (nu.dim() != domain.dim()) throw DimensionError("exp_moment_probe: law and domain dimensions differ");
    if (n_paths < 2) throw ValidationError("exp_moment_probe: needs at least 2 paths");

    const ControlGrid grid = sqrt_grid(domain, 4);
    int best = 0;
    for (int c = 1; c < grid.size(); ++c)
        if (grid.squares[c].trace() > grid.squares[best].trace()) best = c;
    const Eigen::MatrixXd gamma = grid.controls[best].matrix();

    ScalingReport r;
    r.quantity = "exp_moment";
    r.normalization_exponent = 0.0;
    for (std::size_t j = 0; j < n_values.size(); ++j) {
        const int n = n_values[j];
        const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
        std::vector<double> samples(static_cast<std::size_t>(n_paths));
        for_paths(n_paths, exec, [&](std::int64_t i) {
            CounterStream rng(seed, stream_id(j, i));
            Vec m = Vec::Zero(domain.dim());
            double worst = 0.0;
            for (int k = 0; k < n; ++k) {
                m += gamma * nu.draw(rng) * inv_sqrt;
                worst = std::max(worst, sup_norm(m));
            }
            samples[i] = std::exp(a * worst);
        });
        double mean, se;
        mean_stderr(samples, mean, se);
        r.n_values.push_back(n);
        r.estimates.push_back(mean);
        r.stderrs.push_back(se);
        if (!std::isfinite(mean) && r.failure.empty()) {
            std::ostringstream msg;
            msg << "overflow at n = " << n;
            r.failure = msg.str();
        }
    }
    finish(r);
    return r;
}

ConvergenceTable convergence_study(const PayoffFunctional& f, const UncertaintyDomain& domain,
                                   const NoiseDistribution& nu, std::vector<int> n_values,
                                   std::optional<double> oracle, const SolverConfig& config)
{
    std::sort(n_values.begin(), n_values.end());
    n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
    check_n_values(n_values, 2);

    ConvergenceTable t;
    t.mode = oracle ? "oracle" : "cauchy";
    for (int n : n_values) {
        const auto start = std::chrono::steady_clock::now();
        const ValueAndPolicy vp = solve(f, domain, nu, n, config);
        ConvergenceRow row;
        row.n = n;
        row.value = vp.value;
        row.control_resolution = vp.diagnostics.control_resolution;
        row.solver = vp.kind;
        row.richardson_error = vp.diagnostics.richardson_error;
        row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        t.rows.push_back(row);
    }
    const double reference = oracle ? *oracle : t.rows.back().value;
    std::vector<double> xs, ys;
    for (auto& row : t.rows) {
        row.reference = reference;
        row.error = std::abs(row.value - reference);
        t.max_scaled_error = std::max(t.max_scaled_error, row.error * std::pow(static_cast<double>(row.n), 0.125));
        if (row.error > 0.0) {
            xs.push_back(row.n);
            ys.push_back(row.error);
        }
    }
    if (xs.size() >= 2) t.slope = loglog_slope(xs, ys);

    // the last row is the reference itself in Cauchy mode
    const std::size_t last = oracle ? t.rows.size() : t.rows.size() - 1;
    for (std::size_t i = 1; i < last; ++i) {
        const double prev = t.rows[i - 1].error;
        const double cur = t.rows[i].error;
        if (cur <= prev + 1e-12) continue;
        ++t.inversions;
        if (cur > 1.1 * prev + 1e-12) {
            std::ostringstream msg;
            msg << "error rises by more than 10% from n = " << t.rows[i - 1].n << " to n = " << t.rows[i].n;
            if (t.failure.empty()) t.failure = msg.str();
        }
    }
    if (t.inversions > 1 && t.failure.empty()) t.failure = "more than one error inversion";
    if (!std::isfinite(t.max_scaled_error) && t.failure.empty()) t.failure = "non-finite scaled error";
    t.pass = t.failure.empty();
    return t;
}

} // namespace gexp
