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

#include "json.hpp"

#include "gexp/diagnostics.hpp"
#include "gexp/errors.hpp"
#include "gexp/oracle_pde.hpp"

namespace gexp {

// Config problems carry the offending field path and, when known, the line.
class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& field, const std::string& what, int line = -1);
    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    std::string field_;
    int line_;
};

struct DomainSpec {
    std::string kind = "scalar"; // scalar | isotropic | diagonal | hull
    int dim = 1;
    std::vector<double> a_low = {0.04};
    std::vector<double> a_high = {0.25};
    std::vector<std::vector<std::vector<double>>> generators;
};

struct NoiseSpec {
    std::string kind = "rademacher"; // rademacher | normal | finite
    int dim = 1;
    std::vector<std::vector<double>> points;
    std::vector<double> probabilities;
};

struct PayoffSpec {
    std::string family = "call";
    double strike = 0.0;
    double value = 0.0; // constant
    double slope = 1.0; // linear
    double s0 = 1.0;
    std::string convention = "unit"; // unit (S = s0 exp(u - v)) | half (S = s0 exp(u - v/2))
    std::optional<double> h1;
    std::optional<double> h2;
    std::optional<std::string> shape; // convex | concave, for the closed-form oracle
};

struct SolverSpec {
    std::string kind = "auto"; // auto | tree | lattice
    int n = 8;
    int control_resolution = 4;
    int quadrature_order = kDefaultQuadratureOrder;
    std::uint64_t tree_budget = kDefaultTreeBudget;
    double margin = 6.0;
    int u_points = 0;
    int v_points = 0;
    int extra_points = 0;
    bool richardson = true;
};

struct SimulationSpec {
    std::string mode = "discrete"; // discrete | continuous
    std::int64_t paths = 100000;
    std::uint64_t seed = 42;
    int substeps = 16;
    std::int64_t dump_limit = 1000;
};

struct OracleSpec {
    int nx = 801;
    int nt = 2000;
    double theta = 0.5;
    std::optional<double> half_width; // default 6 sqrt(a_high)
    bool richardson = true;
};

struct ConvergeSpec {
    std::vector<int> n_values = {4, 8, 16, 32, 64};
    std::string oracle = "closed_form"; // closed_form | pde | value | none
    double oracle_value = 0.0;
};

struct DiagnoseSpec {
    std::string test = "scaling"; // scaling | exp_moment
    double sigma = 0.5;
    double a = 1.0;
    std::vector<int> n_values = {8, 16, 32, 64, 128};
    std::int64_t paths = 10000;
};

struct ValidateSpec {
    double radius = 2.0;
    int n_max = 64;
    std::int64_t sampled_draws = 0; // 0 skips the Monte Carlo moment check
};

struct OutputSpec {
    std::string format = "json"; // json | csv
};

struct RunConfig {
    DomainSpec domain;
    NoiseSpec noise;
    PayoffSpec payoff;
    SolverSpec solver;
    SimulationSpec simulation;
    OracleSpec oracle;
    ConvergeSpec converge;
    DiagnoseSpec diagnose;
    ValidateSpec validate;
    OutputSpec output;

    /// Builds the domain, law and payoff once to surface errors before any
    /// computation.
    void validate_all() const;
};

/// Parses YAML (JSON is accepted too). Missing keys keep their defaults;
/// unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON of the resolved config; feeding it back to parse_config
/// gives the same config.
nlohmann::ordered_json to_json(const RunConfig& c);

UncertaintyDomain build_domain(const DomainSpec& s);
NoiseDistribution build_noise(const NoiseSpec& s);
PayoffFunctional build_payoff(const PayoffSpec& s, int dim);
SolverConfig build_solver(const SolverSpec& s);
PdeGrid build_pde_grid(const OracleSpec& s, double a_high);

// One-dimensional terminal function of a payoff, for the PDE oracle.
TerminalFn terminal_function(const PayoffSpec& s);
// Declared or known shape of the payoff (convex/concave), if any.
std::optional<Shape> payoff_shape(const PayoffSpec& s);

} // namespace gexp
