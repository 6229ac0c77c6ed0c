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

#include "gexp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace gexp {

namespace {

std::string describe(const std::string& field, const std::string& what, int line)
{
    std::ostringstream msg;
    msg << "config";
    if (line >= 0) msg << " line " << line;
    msg << ": " << field << ": " << what;
    return msg.str();
}

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? -1 : n.Mark().line + 1; }

class Section {
public:
    Section(const YAML::Node& node, std::string path, std::set<std::string> allowed) : node_(node), path_(std::move(path))
    {
        if (!node_) return;
        if (!node_.IsMap()) throw ConfigError(path_, "expected a mapping", line_of(node_));
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) throw ConfigError(path_ + "." + key, "unknown key", line_of(kv.first));
        }
    }

    template <class T>
    void get(const std::string& key, T& out) const
    {
        if (!node_ || !node_[key]) return;
        const YAML::Node v = node_[key];
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path_ + "." + key, "has the wrong type", line_of(v));
        }
    }

    template <class T>
    void get(const std::string& key, std::optional<T>& out) const
    {
        if (!node_ || !node_[key] || node_[key].IsNull()) return;
        T tmp{};
        get(key, tmp);
        out = tmp;
    }

    // Scalars are accepted where a list is expected.
    void get_list(const std::string& key, std::vector<double>& out) const
    {
        if (!node_ || !node_[key]) return;
        const YAML::Node v = node_[key];
        try {
            if (v.IsSequence()) out = v.as<std::vector<double>>();
            else out = {v.as<double>()};
        } catch (const YAML::Exception&) {
            throw ConfigError(path_ + "." + key, "expected a number or a list of numbers", line_of(v));
        }
    }

    int line(const std::string& key) const { return node_ && node_[key] ? line_of(node_[key]) : -1; }
    const std::string& path() const { return path_; }

private:
    YAML::Node node_;
    std::string path_;
};

void require(bool ok, const std::string& field, const std::string& what, int line = -1)
{
    if (!ok) throw ConfigError(field, what, line);
}

void one_of(const std::string& value, std::initializer_list<const char*> options, const std::string& field, int line)
{
    for (const char* o : options)
        if (value == o) return;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    throw ConfigError(field, "must be one of " + list + ", got '" + value + "'", line);
}

void check_n_list(const std::vector<int>& ns, const std::string& field, int line)
{
    require(!ns.empty(), field, "must not be empty", line);
    for (int n : ns) require(n >= 1, field, "entries must be >= 1", line);
}

} // namespace

ConfigError::ConfigError(const std::string& field, const std::string& what, int line)
    : ValidationError(describe(field, what, line)), field_(field), line_(line)
{
}

RunConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<document>", e.msg, e.mark.line + 1);
    }
    RunConfig c;
    if (!root || root.IsNull()) return c;
    const Section top(root, "config",
                      {"domain", "noise", "payoff", "solver", "simulation", "oracle", "converge", "diagnose", "validate",
                       "output"});

    const Section dom(root["domain"], "domain", {"kind", "dim", "a_low", "a_high", "generators"});
    dom.get("kind", c.domain.kind);
    one_of(c.domain.kind, {"scalar", "isotropic", "diagonal", "hull"}, "domain.kind", dom.line("kind"));
    dom.get("dim", c.domain.dim);
    dom.get_list("a_low", c.domain.a_low);
    dom.get_list("a_high", c.domain.a_high);
    dom.get("generators", c.domain.generators);
    if (c.domain.kind == "scalar" || c.domain.kind == "isotropic") {
        require(c.domain.a_low.size() == 1, "domain.a_low", "must be a single number", dom.line("a_low"));
        require(c.domain.a_high.size() == 1, "domain.a_high", "must be a single number", dom.line("a_high"));
        require(c.domain.a_low[0] <= c.domain.a_high[0], "domain.a_low", "must not exceed domain.a_high",
                dom.line("a_low"));
        require(c.domain.a_low[0] >= 0.0, "domain.a_low", "must be >= 0", dom.line("a_low"));
    }
    if (c.domain.kind == "scalar") c.domain.dim = 1;
    if (c.domain.kind == "diagonal") {
        require(c.domain.a_low.size() == c.domain.a_high.size(), "domain.a_high", "must match the length of a_low",
                dom.line("a_high"));
        for (std::size_t i = 0; i < c.domain.a_low.size(); ++i)
            require(0.0 <= c.domain.a_low[i] && c.domain.a_low[i] <= c.domain.a_high[i], "domain.a_low",
                    "needs 0 <= a_low <= a_high per coordinate", dom.line("a_low"));
        c.domain.dim = static_cast<int>(c.domain.a_low.size());
    }
    if (c.domain.kind == "hull") {
        require(!c.domain.generators.empty(), "domain.generators", "must list at least one matrix",
                dom.line("generators"));
        c.domain.dim = static_cast<int>(c.domain.generators.front().size());
        c.domain.a_low.clear();
        c.domain.a_high.clear();
    } else {
        c.domain.generators.clear();
    }
    require(c.domain.dim >= 1, "domain.dim", "must be >= 1", dom.line("dim"));

    const Section noi(root["noise"], "noise", {"kind", "dim", "points", "probabilities"});
    noi.get("kind", c.noise.kind);
    one_of(c.noise.kind, {"rademacher", "normal", "finite"}, "noise.kind", noi.line("kind"));
    noi.get("dim", c.noise.dim);
    noi.get("points", c.noise.points);
    noi.get("probabilities", c.noise.probabilities);
    if (c.noise.kind == "finite") {
        require(!c.noise.points.empty(), "noise.points", "must list the atoms", noi.line("points"));
        c.noise.dim = static_cast<int>(c.noise.points.front().size());
    } else {
        c.noise.points.clear();
        c.noise.probabilities.clear();
    }
    require(c.noise.dim == c.domain.dim, "noise.dim", "must equal the domain dimension", noi.line("dim"));

    const Section pay(root["payoff"], "payoff",
                      {"family", "strike", "value", "slope", "s0", "convention", "h1", "h2", "shape"});
    pay.get("family", c.payoff.family);
    one_of(c.payoff.family,
           {"call", "linear", "square", "neg_abs", "constant", "qv_trace", "stock_call", "lookback_call", "asian_call",
            "sup_norm"},
           "payoff.family", pay.line("family"));
    pay.get("strike", c.payoff.strike);
    pay.get("value", c.payoff.value);
    pay.get("slope", c.payoff.slope);
    pay.get("s0", c.payoff.s0);
    pay.get("convention", c.payoff.convention);
    one_of(c.payoff.convention, {"unit", "half"}, "payoff.convention", pay.line("convention"));
    pay.get("h1", c.payoff.h1);
    pay.get("h2", c.payoff.h2);
    pay.get("shape", c.payoff.shape);
    if (c.payoff.shape) one_of(*c.payoff.shape, {"convex", "concave"}, "payoff.shape", pay.line("shape"));
    require(c.payoff.s0 > 0.0, "payoff.s0", "must be > 0", pay.line("s0"));

    const Section sol(root["solver"], "solver",
                      {"kind", "n", "control_resolution", "quadrature_order", "tree_budget", "margin", "u_points",
                       "v_points", "extra_points", "richardson"});
    sol.get("kind", c.solver.kind);
    one_of(c.solver.kind, {"auto", "tree", "lattice"}, "solver.kind", sol.line("kind"));
    sol.get("n", c.solver.n);
    sol.get("control_resolution", c.solver.control_resolution);
    sol.get("quadrature_order", c.solver.quadrature_order);
    sol.get("tree_budget", c.solver.tree_budget);
    sol.get("margin", c.solver.margin);
    sol.get("u_points", c.solver.u_points);
    sol.get("v_points", c.solver.v_points);
    sol.get("extra_points", c.solver.extra_points);
    sol.get("richardson", c.solver.richardson);
    require(c.solver.n >= 1, "solver.n", "must be >= 1", sol.line("n"));
    require(c.solver.control_resolution >= 1, "solver.control_resolution", "must be >= 1",
            sol.line("control_resolution"));
    require(c.solver.quadrature_order >= 2, "solver.quadrature_order", "must be >= 2", sol.line("quadrature_order"));
    require(c.solver.margin > 0.0, "solver.margin", "must be > 0", sol.line("margin"));
    require(c.solver.u_points >= 0 && c.solver.v_points >= 0 && c.solver.extra_points >= 0, "solver.u_points",
            "point counts must be >= 0 (0 picks the default)", sol.line("u_points"));

    const Section sim(root["simulation"], "simulation", {"mode", "paths", "seed", "substeps", "dump_limit"});
    sim.get("mode", c.simulation.mode);
    one_of(c.simulation.mode, {"discrete", "continuous"}, "simulation.mode", sim.line("mode"));
    sim.get("paths", c.simulation.paths);
    sim.get("seed", c.simulation.seed);
    sim.get("substeps", c.simulation.substeps);
    sim.get("dump_limit", c.simulation.dump_limit);
    require(c.simulation.paths >= 2, "simulation.paths", "must be >= 2", sim.line("paths"));
    require(c.simulation.substeps >= 1, "simulation.substeps", "must be >= 1", sim.line("substeps"));
    require(c.simulation.dump_limit >= 0, "simulation.dump_limit", "must be >= 0", sim.line("dump_limit"));

    const Section ora(root["oracle"], "oracle", {"nx", "nt", "theta", "half_width", "richardson"});
    ora.get("nx", c.oracle.nx);
    ora.get("nt", c.oracle.nt);
    ora.get("theta", c.oracle.theta);
    ora.get("half_width", c.oracle.half_width);
    ora.get("richardson", c.oracle.richardson);
    require(c.oracle.nx >= 5, "oracle.nx", "must be >= 5", ora.line("nx"));
    require(c.oracle.nt >= 1, "oracle.nt", "must be >= 1", ora.line("nt"));
    require(c.oracle.theta >= 0.0 && c.oracle.theta <= 1.0, "oracle.theta", "must lie in [0, 1]", ora.line("theta"));
    if (c.oracle.half_width) require(*c.oracle.half_width > 0.0, "oracle.half_width", "must be > 0", ora.line("half_width"));

    const Section con(root["converge"], "converge", {"n_values", "oracle", "oracle_value"});
    con.get("n_values", c.converge.n_values);
    con.get("oracle", c.converge.oracle);
    con.get("oracle_value", c.converge.oracle_value);
    one_of(c.converge.oracle, {"closed_form", "pde", "value", "none"}, "converge.oracle", con.line("oracle"));
    check_n_list(c.converge.n_values, "converge.n_values", con.line("n_values"));

    const Section dia(root["diagnose"], "diagnose", {"test", "sigma", "a", "n_values", "paths"});
    dia.get("test", c.diagnose.test);
    one_of(c.diagnose.test, {"scaling", "exp_moment"}, "diagnose.test", dia.line("test"));
    dia.get("sigma", c.diagnose.sigma);
    dia.get("a", c.diagnose.a);
    dia.get("n_values", c.diagnose.n_values);
    dia.get("paths", c.diagnose.paths);
    check_n_list(c.diagnose.n_values, "diagnose.n_values", dia.line("n_values"));
    require(c.diagnose.sigma >= 0.0, "diagnose.sigma", "must be >= 0", dia.line("sigma"));
    require(c.diagnose.a > 0.0, "diagnose.a", "must be > 0", dia.line("a"));
    require(c.diagnose.paths >= 2, "diagnose.paths", "must be >= 2", dia.line("paths"));

    const Section val(root["validate"], "validate", {"radius", "n_max", "sampled_draws"});
    val.get("radius", c.validate.radius);
    val.get("n_max", c.validate.n_max);
    val.get("sampled_draws", c.validate.sampled_draws);
    require(c.validate.radius > 0.0, "validate.radius", "must be > 0", val.line("radius"));
    require(c.validate.n_max >= 1, "validate.n_max", "must be >= 1", val.line("n_max"));
    require(c.validate.sampled_draws >= 0, "validate.sampled_draws", "must be >= 0", val.line("sampled_draws"));

    const Section out(root["output"], "output", {"format"});
    out.get("format", c.output.format);
    one_of(c.output.format, {"json", "csv"}, "output.format", out.line("format"));

    c.validate_all();
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void RunConfig::validate_all() const
{
    try {
        build_domain(domain);
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError("domain", e.what());
    }
    try {
        build_noise(noise);
    } catch (const ValidationError& e) {
        throw ConfigError("noise", e.what());
    }
    try {
        build_payoff(payoff, domain.dim);
    } catch (const ValidationError& e) {
        throw ConfigError("payoff", e.what());
    }
}

nlohmann::ordered_json to_json(const RunConfig& c)
{
    using J = nlohmann::ordered_json;
    J j;
    J dom = {{"kind", c.domain.kind}, {"dim", c.domain.dim}};
    if (c.domain.kind == "hull") dom["generators"] = c.domain.generators;
    else if (c.domain.kind == "diagonal") {
        dom["a_low"] = c.domain.a_low;
        dom["a_high"] = c.domain.a_high;
    } else {
        dom["a_low"] = c.domain.a_low.at(0);
        dom["a_high"] = c.domain.a_high.at(0);
    }
    j["domain"] = dom;
    J noi = {{"kind", c.noise.kind}, {"dim", c.noise.dim}};
    if (c.noise.kind == "finite") {
        noi["points"] = c.noise.points;
        noi["probabilities"] = c.noise.probabilities;
    }
    j["noise"] = noi;
    J pay = {{"family", c.payoff.family},  {"strike", c.payoff.strike}, {"value", c.payoff.value},
             {"slope", c.payoff.slope},    {"s0", c.payoff.s0},         {"convention", c.payoff.convention}};
    if (c.payoff.h1) pay["h1"] = *c.payoff.h1;
    if (c.payoff.h2) pay["h2"] = *c.payoff.h2;
    if (c.payoff.shape) pay["shape"] = *c.payoff.shape;
    j["payoff"] = pay;
    j["solver"] = {{"kind", c.solver.kind},
                   {"n", c.solver.n},
                   {"control_resolution", c.solver.control_resolution},
                   {"quadrature_order", c.solver.quadrature_order},
                   {"tree_budget", c.solver.tree_budget},
                   {"margin", c.solver.margin},
                   {"u_points", c.solver.u_points},
                   {"v_points", c.solver.v_points},
                   {"extra_points", c.solver.extra_points},
                   {"richardson", c.solver.richardson}};
    j["simulation"] = {{"mode", c.simulation.mode},
                       {"paths", c.simulation.paths},
                       {"seed", c.simulation.seed},
                       {"substeps", c.simulation.substeps},
                       {"dump_limit", c.simulation.dump_limit}};
    J ora = {{"nx", c.oracle.nx}, {"nt", c.oracle.nt}, {"theta", c.oracle.theta}, {"richardson", c.oracle.richardson}};
    if (c.oracle.half_width) ora["half_width"] = *c.oracle.half_width;
    j["oracle"] = ora;
    j["converge"] = {{"n_values", c.converge.n_values},
                     {"oracle", c.converge.oracle},
                     {"oracle_value", c.converge.oracle_value}};
    j["diagnose"] = {{"test", c.diagnose.test},
                     {"sigma", c.diagnose.sigma},
                     {"a", c.diagnose.a},
                     {"n_values", c.diagnose.n_values},
                     {"paths", c.diagnose.paths}};
    j["validate"] = {{"radius", c.validate.radius},
                     {"n_max", c.validate.n_max},
                     {"sampled_draws", c.validate.sampled_draws}};
    j["output"] = {{"format", c.output.format}};
    return j;
}

UncertaintyDomain build_domain(const DomainSpec& s)
{
    if (s.kind == "scalar") return UncertaintyDomain::scalar(s.a_low.at(0), s.a_high.at(0));
    if (s.kind == "isotropic") return UncertaintyDomain::isotropic(s.dim, s.a_low.at(0), s.a_high.at(0));
    if (s.kind == "diagonal") return UncertaintyDomain::diagonal(s.a_low, s.a_high);
    std::vector<SymMatrix> gens;
    for (std::size_t g = 0; g < s.generators.size(); ++g) {
        const auto& rows = s.generators[g];
        const int d = static_cast<int>(rows.size());
        Eigen::MatrixXd m(d, d);
        for (int i = 0; i < d; ++i) {
            if (static_cast<int>(rows[i].size()) != d)
                throw ConfigError("domain.generators[" + std::to_string(g) + "]", "must be a square matrix");
            for (int k = 0; k < d; ++k) m(i, k) = rows[i][k];
        }
        gens.push_back(SymMatrix::from_matrix(m));
    }
    return UncertaintyDomain::hull(std::move(gens));
}

NoiseDistribution build_noise(const NoiseSpec& s)
{
    if (s.dim < 1) throw ConfigError("noise.dim", "must be >= 1");
    if (s.kind == "rademacher") return NoiseDistribution::rademacher(s.dim);
    if (s.kind == "normal") return NoiseDistribution::normal(s.dim);
    std::vector<Vec> pts;
    for (const auto& p : s.points) pts.push_back(Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())));
    return NoiseDistribution::finite(std::move(pts), s.probabilities);
}

PayoffFunctional build_payoff(const PayoffSpec& s, int dim)
{
    const auto conv = s.convention == "half" ? StockConvention::Half : StockConvention::Unit;
    PayoffFunctional f = [&] {
        if (s.family == "call") return payoffs::terminal_call(s.strike, dim);
        if (s.family == "linear") return payoffs::terminal_linear(s.slope, dim);
        if (s.family == "square") return payoffs::terminal_square(dim);
        if (s.family == "neg_abs") return payoffs::terminal_neg_abs(dim);
        if (s.family == "constant") return payoffs::constant(s.value, dim);
        if (s.family == "qv_trace") return payoffs::qv_trace(dim);
        if (s.family == "stock_call") return payoffs::stock_call(s.s0, s.strike, conv, dim);
        if (s.family == "lookback_call") return payoffs::lookback_call(s.strike, dim);
        if (s.family == "asian_call") return payoffs::asian_call(s.strike, dim);
        if (s.family == "sup_norm") return payoffs::sup_norm_payoff(dim);
        throw ConfigError("payoff.family", "unknown family '" + s.family + "'");
    }();
    if (s.h1 || s.h2) f = f.with_constants(s.h1.value_or(f.h1()), s.h2.value_or(f.h2()));
    return f;
}

SolverConfig build_solver(const SolverSpec& s)
{
    SolverConfig c;
    c.kind = s.kind == "tree" ? SolverChoice::Tree : s.kind == "lattice" ? SolverChoice::Lattice : SolverChoice::Auto;
    c.control_resolution = s.control_resolution;
    c.quadrature_order = s.quadrature_order;
    c.tree_budget = s.tree_budget;
    c.state.margin = s.margin;
    c.state.u_points = s.u_points;
    c.state.v_points = s.v_points;
    c.state.extra_points = s.extra_points;
    c.state.richardson = s.richardson;
    return c;
}

PdeGrid build_pde_grid(const OracleSpec& s, double a_high)
{
    PdeGrid g = PdeGrid::standard(a_high);
    if (s.half_width) {
        g.x_min = -*s.half_width;
        g.x_max = *s.half_width;
    }
    g.nx = s.nx;
    g.nt = s.nt;
    g.theta = s.theta;
    return g;
}

TerminalFn terminal_function(const PayoffSpec& s)
{
    const double k = s.strike, c = s.value, a = s.slope;
    if (s.family == "call") return [k](double x) { return std::max(x - k, 0.0); };
    if (s.family == "linear") return [a](double x) { return a * x; };
    if (s.family == "square") return [](double x) { return x * x; };
    if (s.family == "neg_abs") return [](double x) { return -std::abs(x); };
    if (s.family == "constant") return [c](double) { return c; };
    throw ConfigError("payoff.family",
                      "oracle needs a terminal payoff (call, linear, square, neg_abs, constant), got '" + s.family + "'");
}

std::optional<Shape> payoff_shape(const PayoffSpec& s)
{
    if (s.shape) return shape_from_string(*s.shape);
    if (s.family == "call" || s.family == "square" || s.family == "linear" || s.family == "constant")
        return Shape::Convex;
    if (s.family == "neg_abs") return Shape::Concave;
    return std::nullopt;
}

} // namespace gexp
