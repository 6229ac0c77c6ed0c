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

#include <iostream>

#include <omp.h>

#include "CLI11.hpp"
#include "commands.hpp"
#include "gexp/table_io.hpp"

namespace {

struct Overrides {
    std::optional<int> n;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<int> substeps;
    std::optional<std::string> format;
};

gexp::RunConfig resolve(const std::optional<std::string>& config_path, const std::optional<std::string>& table,
                        const Overrides& o, const std::string& command)
{
    gexp::RunConfig c;
    if (config_path) c = gexp::load_config(*config_path);
    else if (table) c = gexp::read_table(*table).config;
    if (o.n) c.solver.n = *o.n;
    if (o.seed) c.simulation.seed = *o.seed;
    if (o.paths) (command == "diagnose" ? c.diagnose.paths : c.simulation.paths) = *o.paths;
    if (o.substeps) c.simulation.substeps = *o.substeps;
    if (o.format) c.output.format = *o.format;
    // Flags go through the same validation as the file.
    return gexp::parse_config(gexp::to_json(c).dump());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete G-expectation solver under volatility uncertainty"};
    app.require_subcommand(1);
    app.fallthrough();

    gexp::cli::Options opt;
    std::optional<std::string> config_path;
    Overrides ov;
    int threads = 0;

    app.add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
    app.add_option("--n", ov.n, "number of steps");
    app.add_option("--seed", ov.seed, "simulation seed");
    app.add_option("--paths", ov.paths, "Monte Carlo paths");
    app.add_option("--substeps", ov.substeps, "Brownian substeps per step (continuous simulation)");
    app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", opt.out, "write the JSON summary (or CSV table) to FILE");
    app.add_option("--format", ov.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--no-timestamp", opt.no_timestamp, "omit timestamps and runtimes");

    app.add_subcommand("solve", "solve the discrete DP")
        ->add_option("--table-out", opt.table_out, "write the binary policy table");
    auto* sim = app.add_subcommand("simulate", "simulate the extracted policy");
    sim->add_option("--dump-paths", opt.dump_paths, "CSV dump of the first paths");
    sim->add_option("--table", opt.table_in, "reuse a policy table instead of solving")->check(CLI::ExistingFile);
    app.add_subcommand("oracle", "Barenblatt PDE and closed-form values (d = 1)");
    app.add_subcommand("converge", "convergence table over n");
    app.add_subcommand("diagnose", "discretization and moment scaling checks");
    app.add_subcommand("validate-dist", "moment and MGF checks of the noise law");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    opt.command = app.get_subcommands().front()->get_name();

    try {
        if (threads > 0) omp_set_num_threads(threads);
        const gexp::RunConfig config = resolve(config_path, opt.table_in, ov, opt.command);
        gexp::cli::run_command(opt, config);
        return 0;
    } catch (const gexp::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
