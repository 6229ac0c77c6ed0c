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

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "gexp/diagnostics.hpp"
#include "gexp/oracle_pde.hpp"
#include "gexp/policy_process.hpp"
#include "gexp/table_io.hpp"

namespace gexp::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json matrix_json(const SymMatrix& m)
{
    Json rows = Json::array();
    for (int i = 0; i < m.dim(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

// CSV value: shortest form that reads back exactly.
std::string num(double x)
{
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

struct Csv {
    std::string header;
    std::vector<std::string> rows;
};

class Emitter {
public:
    Emitter(const Options& opt, const RunConfig& config) : opt_(opt), config_(config), start_(Clock::now()) {}

    void finish(Json result, const Csv& csv) const
    {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = opt_.command;
        j["config"] = to_json(config_);
        j["result"] = std::move(result);
        if (!opt_.no_timestamp) {
            j["timestamp"] = utc_now();
            j["runtime_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
        }
        const std::string summary = j.dump(2) + "\n";
        std::string table = csv.header + "\n";
        for (const auto& r : csv.rows) table += r + "\n";

        if (config_.output.format == "csv") {
            // CSV goes to --out (or stdout); the JSON summary stays on stdout.
            if (opt_.out) {
                write_file(*opt_.out, table);
                std::cout << summary;
            } else {
                std::cout << table;
            }
        } else if (opt_.out) {
            write_file(*opt_.out, summary);
        } else {
            std::cout << summary;
        }
    }

    bool timestamps() const { return !opt_.no_timestamp; }

private:
    static void write_file(const std::string& path, const std::string& text)
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot write '" + path + "'");
        f << text;
    }

    const Options& opt_;
    const RunConfig& config_;
    Clock::time_point start_;
};

struct Problem {
    UncertaintyDomain domain;
    NoiseDistribution nu;
    PayoffFunctional f;
};

// Solver commands refuse laws that are not centred with identity covariance.
Problem build_problem(const RunConfig& c)
{
    NoiseDistribution nu = build_noise(c.noise);
    if (const MomentReport m = validate_moments(nu); !m.pass)
        throw ConfigError("noise", "fails the moment conditions (" + m.detail + "); see validate-dist");
    return {build_domain(c.domain), std::move(nu), build_payoff(c.payoff, c.domain.dim)};
}

std::optional<int> root_control(const ValueAndPolicy& vp)
{
    if (const auto* tp = std::get_if<TreePolicy>(&vp.policy)) return tp->control.at(0).at(0);
    const auto& lp = std::get<LatticePolicy>(vp.policy);
    const std::vector<double> origin(static_cast<std::size_t>(lp.lattice.rank()), 0.0);
    return lattice_policy_at(vp, 0, origin);
}

Json solution_json(const ValueAndPolicy& vp)
{
    const auto& d = vp.diagnostics;
    Json j;
    j["value"] = vp.value;
    j["n"] = vp.steps;
    j["solver"] = to_string(vp.kind);
    j["noise"] = vp.noise_kind;
    j["control_resolution"] = d.control_resolution;
    j["control_count"] = d.control_count;
    j["quadrature_order"] = d.quadrature_order;
    j["quadrature_nodes"] = d.quadrature_nodes;
    if (vp.kind == SolverKind::Tree) {
        j["leaves"] = d.leaves;
    } else {
        j["state_points"] = d.state_points;
        j["refined_value"] = optional_number(d.refined_value);
        j["richardson_error"] = optional_number(d.richardson_error);
        j["boundary_probability"] = d.boundary_probability;
        j["extrapolated_states"] = d.extrapolated_states;
    }
    if (const auto c = root_control(vp)) {
        j["root_control"] = *c;
        j["root_volatility"] = matrix_json(vp.controls.squares.at(static_cast<std::size_t>(*c)));
    } else {
        j["root_control"] = nullptr;
    }
    j["warnings"] = d.warnings;
    return j;
}

void cmd_solve(const Options& opt, const RunConfig& c)
{
    const Emitter out(opt, c);
    const Problem p = build_problem(c);
    const ValueAndPolicy vp = solve(p.f, p.domain, p.nu, c.solver.n, build_solver(c.solver));
    if (opt.table_out) write_table(*opt.table_out, c, vp);
    Csv csv{"n,value,solver,control_resolution,richardson_error", {}};
    csv.rows.push_back(std::to_string(vp.steps) + "," + num(vp.value) + "," + to_string(vp.kind) + "," +
                       std::to_string(c.solver.control_resolution) + "," +
                       (vp.diagnostics.richardson_error ? num(*vp.diagnostics.richardson_error) : ""));
    out.finish(solution_json(vp), csv);
}

bool same_problem(const RunConfig& a, const RunConfig& b)
{
    const Json ja = to_json(a), jb = to_json(b);
    for (const char* key : {"domain", "noise", "payoff", "solver"})
        if (ja[key] != jb[key]) return false;
    return true;
}

void cmd_simulate(const Options& opt, const RunConfig& c)
{
    const Emitter out(opt, c);
    const Problem p = build_problem(c);
    ValueAndPolicy vp;
    if (opt.table_in) {
        LoadedTable t = read_table(*opt.table_in);
        if (!same_problem(t.config, c))
            throw ValidationError("simulate: --table was solved for a different domain, noise, payoff or solver");
        vp = std::move(t.vp);
    } else {
        vp = solve(p.f, p.domain, p.nu, c.solver.n, build_solver(c.solver));
    }

    std::ofstream dump_file;
    PathDump dump;
    if (opt.dump_paths) {
        dump_file.open(*opt.dump_paths, std::ios::trunc);
        if (!dump_file) throw ValidationError("simulate: cannot write '" + *opt.dump_paths + "'");
        dump = {&dump_file, c.simulation.dump_limit};
    }

    const auto& s = c.simulation;
    const bool continuous = s.mode == "continuous";
    const SimulationEstimate est = continuous
                                       ? simulate_continuous(vp, p.f, s.substeps, s.paths, s.seed, Execution::Parallel, dump)
                                       : simulate_discrete(vp, p.nu, p.f, s.paths, s.seed, Execution::Parallel, dump);

    Json j;
    j["mode"] = s.mode;
    j["value"] = vp.value;
    j["solver"] = to_string(vp.kind);
    j["n"] = vp.steps;
    j["mean"] = est.mean;
    j["stderr"] = est.stderr_;
    j["paths"] = est.n_paths;
    j["failed_paths"] = est.failed_paths;
    j["seed"] = est.seed;
    j["valid"] = est.valid;
    j["z_score"] = est.stderr_ > 0.0 ? (est.mean - vp.value) / est.stderr_ : 0.0;
    j["terminal_mean"] = vec_json(est.terminal_mean);
    j["terminal_stderr"] = vec_json(est.terminal_stderr);
    if (continuous) {
        j["substeps"] = s.substeps;
        j["inadmissible_steps"] = est.inadmissible_steps;
    } else {
        j["max_qv_mismatch"] = est.max_qv_mismatch;
    }
    Csv csv{"mode,n,value,mean,stderr,paths,failed_paths,seed", {}};
    csv.rows.push_back(s.mode + "," + std::to_string(vp.steps) + "," + num(vp.value) + "," + num(est.mean) + "," +
                       num(est.stderr_) + "," + std::to_string(est.n_paths) + "," + std::to_string(est.failed_paths) +
                       "," + std::to_string(est.seed));
    out.finish(std::move(j), csv);
}

void require_scalar(const RunConfig& c, const char* what)
{
    if (c.domain.kind != "scalar")
        throw ConfigError("domain.kind", std::string(what) + " needs a scalar domain (d = 1)");
}

void cmd_oracle(const Options& opt, const RunConfig& c)
{
    const Emitter out(opt, c);
    require_scalar(c, "oracle");
    const double lo = c.domain.a_low.at(0), hi = c.domain.a_high.at(0);
    const TerminalFn g = terminal_function(c.payoff);
    const PdeGrid grid = build_pde_grid(c.oracle, hi);
    grid.validate(hi);
    const PdeSolution pde = c.oracle.richardson ? solve_barenblatt_richardson(g, lo, hi, grid)
                                                : solve_barenblatt(g, lo, hi, grid);
    Json j;
    j["pde_value"] = pde.value;
    j["richardson_error"] = pde.richardson_error >= 0.0 ? Json(pde.richardson_error) : Json(nullptr);
    j["max_policy_sweeps"] = pde.max_sweeps;
    j["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"nx", grid.nx}, {"nt", grid.nt}, {"theta", grid.theta}};
    std::string closed = "";
    if (const auto shape = payoff_shape(c.payoff)) {
        const double cf = closed_form_extremal(g, *shape, lo, hi);
        j["closed_form"] = cf;
        j["shape"] = *shape == Shape::Convex ? "convex" : "concave";
        j["difference"] = std::abs(cf - pde.value);
        closed = num(cf);
    } else {
        j["closed_form"] = nullptr;
    }
    Csv csv{"pde_value,richardson_error,closed_form", {}};
    csv.rows.push_back(num(pde.value) + "," + (pde.richardson_error >= 0.0 ? num(pde.richardson_error) : "") + "," +
                       closed);
    out.finish(std::move(j), csv);
}

std::optional<double> converge_oracle(const RunConfig& c)
{
    const auto& kind = c.converge.oracle;
    if (kind == "none") return std::nullopt;
    if (kind == "value") return c.converge.oracle_value;
    require_scalar(c, "converge.oracle");
    const double lo = c.domain.a_low.at(0), hi = c.domain.a_high.at(0);
    const TerminalFn g = terminal_function(c.payoff);
    if (kind == "pde") {
        const PdeGrid grid = build_pde_grid(c.oracle, hi);
        grid.validate(hi);
        return solve_barenblatt_richardson(g, lo, hi, grid).value;
    }
    const auto shape = payoff_shape(c.payoff);
    if (!shape) throw ConfigError("payoff.shape", "the closed-form oracle needs a convex or concave payoff");
    return closed_form_extremal(g, *shape, lo, hi);
}

void cmd_converge(const Options& opt, const RunConfig& c)
{
    const Emitter out(opt, c);
    const Problem p = build_problem(c);
    const std::optional<double> oracle = converge_oracle(c);
    const ConvergenceTable t = convergence_study(p.f, p.domain, p.nu, c.converge.n_values, oracle, build_solver(c.solver));

    Json rows = Json::array();
    Csv csv{"n,value,reference,error,scaled_error,solver,control_resolution,richardson_error", {}};
    for (const auto& r : t.rows) {
        const double scaled = r.error * std::pow(r.n, 0.125);
        Json row = {{"n", r.n},
                    {"value", r.value},
                    {"reference", r.reference},
                    {"error", r.error},
                    {"scaled_error", scaled},
                    {"solver", to_string(r.solver)},
                    {"control_resolution", r.control_resolution},
                    {"richardson_error", optional_number(r.richardson_error)}};
        if (out.timestamps()) row["runtime_seconds"] = r.runtime_seconds;
        rows.push_back(std::move(row));
        csv.rows.push_back(std::to_string(r.n) + "," + num(r.value) + "," + num(r.reference) + "," + num(r.error) +
                           "," + num(scaled) + "," + to_string(r.solver) + "," +
                           std::to_string(r.control_resolution) + "," +
                           (r.richardson_error ? num(*r.richardson_error) : ""));
    }
    Json j;
    j["mode"] = t.mode;
    j["oracle"] = optional_number(oracle);
    j["rows"] = std::move(rows);
    j["max_scaled_error"] = t.max_scaled_error;
    j["slope"] = optional_number(t.slope);
    j["inversions"] = t.inversions;
    j["pass"] = t.pass;
    j["failure"] = t.failure;
    out.finish(std::move(j), csv);
}

Json scaling_json(const ScalingReport& r)
{
    return {{"quantity", r.quantity},
            {"normalization_exponent", r.normalization_exponent},
            {"n_values", r.n_values},
            {"estimates", r.estimates},
            {"stderrs", r.stderrs},
            {"normalized", r.normalized},
            {"slope", optional_number(r.slope)},
            {"bound_constant", r.bound_constant},
            {"ratio", r.ratio},
            {"growth", r.growth},
            {"ratio_limit", r.ratio_limit},
            {"pass", r.pass},
            {"failure", r.failure}};
}

void scaling_rows(const ScalingReport& r, Csv& csv)
{
    for (std::size_t i = 0; i < r.n_values.size(); ++i)
        csv.rows.push_back(r.quantity + "," + std::to_string(r.n_values[i]) + "," + num(r.estimates[i]) + "," +
                           num(r.stderrs[i]) + "," + num(r.normalized[i]));
}

void cmd_diagnose(const Options& opt, const RunConfig& c)
{
    const Emitter out(opt, c);
    const auto& d = c.diagnose;
    Csv csv{"quantity,n,estimate,stderr,normalized", {}};
    Json j;
    j["test"] = d.test;
    if (d.test == "scaling") {
        const DiscretizationReport r = discretization_scaling(d.sigma, d.n_values, d.paths, c.simulation.seed);
        j["fourth_moment"] = scaling_json(r.fourth_moment);
        j["qv_deviation"] = scaling_json(r.qv_deviation);
        j["pass"] = r.fourth_moment.pass && r.qv_deviation.pass;
        scaling_rows(r.fourth_moment, csv);
        scaling_rows(r.qv_deviation, csv);
    } else {
        const ScalingReport r =
            exp_moment_probe(build_domain(c.domain), build_noise(c.noise), d.a, d.n_values, d.paths, c.simulation.seed);
        j["exp_moment"] = scaling_json(r);
        j["pass"] = r.pass;
        scaling_rows(r, csv);
    }
    out.finish(std::move(j), csv);
}

Json moments_json(const MomentReport& m)
{
    Json cov = Json::array();
    for (Eigen::Index i = 0; i < m.covariance.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.covariance.cols(); ++k) row.push_back(m.covariance(i, k));
        cov.push_back(row);
    }
    Json j = {{"mean", vec_json(m.mean)},
              {"covariance", cov},
              {"third_abs_moment", m.third_abs_moment},
              {"sampled", m.sampled},
              {"tolerance", m.tolerance},
              {"pass", m.pass},
              {"detail", m.detail}};
    if (m.sampled) j["draws"] = m.draws;
    return j;
}

void cmd_validate(const Options& opt, const RunConfig& c)
{
    const Emitter out(opt, c);
    const NoiseDistribution nu = build_noise(c.noise);
    const MomentReport m = validate_moments(nu);
    const MgfReport g = validate_mgf_bound(nu, c.validate.radius, c.validate.n_max);
    Json j;
    j["noise"] = nu.kind_name();
    j["dim"] = nu.dim();
    j["moments"] = moments_json(m);
    j["mgf"] = {{"radius", g.radius},   {"n_max", g.n_max},         {"max_value", g.max_value},
                {"argmax_n", g.argmax_n}, {"threshold", g.threshold}, {"overflow", g.overflow},
                {"pass", g.pass},       {"scope", g.scope}};
    bool pass = m.pass && g.pass;
    Csv csv{"check,pass,detail", {}};
    csv.rows.push_back(std::string("moments,") + (m.pass ? "true" : "false") + "," + num(m.tolerance));
    csv.rows.push_back(std::string("mgf,") + (g.pass ? "true" : "false") + "," + num(g.max_value));
    if (c.validate.sampled_draws > 0) {
        const MomentReport s = validate_moments_sampled(nu, c.simulation.seed, c.validate.sampled_draws);
        j["sampled_moments"] = moments_json(s);
        pass = pass && s.pass;
        csv.rows.push_back(std::string("sampled_moments,") + (s.pass ? "true" : "false") + "," + num(s.tolerance));
    }
    j["pass"] = pass;
    out.finish(std::move(j), csv);
}

} // namespace

void run_command(const Options& opt, const RunConfig& config)
{
    if (opt.command == "solve") return cmd_solve(opt, config);
    if (opt.command == "simulate") return cmd_simulate(opt, config);
    if (opt.command == "oracle") return cmd_oracle(opt, config);
    if (opt.command == "converge") return cmd_converge(opt, config);
    if (opt.command == "diagnose") return cmd_diagnose(opt, config);
    if (opt.command == "validate-dist") return cmd_validate(opt, config);
    throw ValidationError("unknown command '" + opt.command + "'");
}

} // namespace gexp::cli
