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
#include <optional>
#include <string>
#include <vector>

#include "gexp/dp_solver.hpp"

namespace gexp {

// Monte Carlo estimates of a quantity across n, normalized by n^p. The
// bound is read as "normalized sequence stays bounded": pass iff its
// max/min ratio is at most `ratio_limit`.
struct ScalingReport {
    std::string quantity;
    double normalization_exponent = 0.0; // p in estimate * n^p
    std::vector<int> n_values;
    std::vector<double> estimates;
    std::vector<double> stderrs;
    std::vector<double> normalized;
    std::optional<double> slope; // least squares on (log n, log estimate); absent if any estimate is 0
    double bound_constant = 0.0; // max of the normalized sequence
    double ratio = 1.0;          // max / min of the normalized sequence
    double growth = 1.0;         // last / first normalized value
    double ratio_limit = 3.0;
    bool pass = false;
    std::string failure;
};

struct DiscretizationReport {
    ScalingReport fourth_moment; // E max_k max_t |M_t - N_k|^4, normalized by n
    ScalingReport qv_deviation;  // E max_k max_t |<M>_t - <N>_k|^2, normalized by sqrt(n)
};

inline constexpr int kScalingOversampling = 64;

/// M = sigma W on n * 64 fine steps per path, N_k = M_{k/n}.
DiscretizationReport discretization_scaling(double sigma, const std::vector<int>& n_values, std::int64_t n_paths,
                                            std::uint64_t seed, Execution exec = Execution::Parallel);

/// E exp(A max_k ||M_k||) for M_k = n^{-1/2} sum gamma Y_i with gamma fixed at
/// the control of largest trace. Fails on overflow, naming the n.
ScalingReport exp_moment_probe(const UncertaintyDomain& domain, const NoiseDistribution& nu, double a,
                               const std::vector<int>& n_values, std::int64_t n_paths, std::uint64_t seed,
                               Execution exec = Execution::Parallel);

struct ConvergenceRow {
    int n = 0;
    double value = 0.0;
    double reference = 0.0;
    double error = 0.0;
    int control_resolution = 0;
    SolverKind solver = SolverKind::Tree;
    std::optional<double> richardson_error;
    double runtime_seconds = 0.0;
};

struct ConvergenceTable {
    std::string mode; // "oracle" or "cauchy"
    std::vector<ConvergenceRow> rows;
    double max_scaled_error = 0.0; // max over rows of error * n^{1/8}
    std::optional<double> slope;   // fitted on rows with error > 0
    int inversions = 0;
    bool pass = false;
    std::string failure;
};

/// Solves for each n (ascending) and tabulates |V_n - V|. Without an oracle
/// the largest-n value serves as the reference. Passes iff the errors are
/// non-increasing in n except for at most one rise of at most 10%.
ConvergenceTable convergence_study(const PayoffFunctional& f, const UncertaintyDomain& domain,
                                   const NoiseDistribution& nu, std::vector<int> n_values,
                                   std::optional<double> oracle, const SolverConfig& config);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace gexp
