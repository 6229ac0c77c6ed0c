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

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args)
{
    const std::string cmd = std::string(GEXP_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    std::FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string write_config(const std::string& name, const std::string& text)
{
    const auto path = std::filesystem::temp_directory_path() / ("gexp_cli_" + name + ".yaml");
    std::ofstream(path) << text;
    return path.string();
}

} // namespace

TEST_CASE("validate-dist on Rademacher")
{
    const auto r = run("validate-dist --no-timestamp --config " + write_config("rad", "noise: {kind: rademacher}\n"));
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["result"]["moments"]["pass"] == true);
    CHECK(j["result"]["pass"] == true);
}

TEST_CASE("solve on the singleton domain returns the isometry value")
{
    const auto cfg = write_config("sq", "domain: {a_low: 1.0, a_high: 1.0}\npayoff: {family: square}\nsolver: {n: 4}\n");
    const auto r = run("solve --no-timestamp --config " + cfg);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["result"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(j.contains("timestamp"));
}

TEST_CASE("bad domain exits 1 and names the field")
{
    const auto cfg = write_config("bad", "domain:\n  a_low: 0.5\n  a_high: 0.1\n");
    const std::string cmd = std::string(GEXP_CLI_PATH) + " solve --config " + cfg + " 2>&1";
    std::FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 512> buf{};
    while (std::size_t got = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), got);
    const int status = pclose(p);
    CHECK(WEXITSTATUS(status) == 1);
    CHECK(out.find("domain.a_low") != std::string::npos);
}

TEST_CASE("usage errors exit 1, computational failures exit 2")
{
    CHECK(run("").exit_code == 1);
    CHECK(run("solve --n 0").exit_code == 1);
    CHECK(run("frobnicate").exit_code == 1);
    const auto skew = write_config("skew", "noise: {kind: finite, points: [[0], [2]], probabilities: [0.5, 0.5]}\n");
    CHECK(run("solve --config " + skew).exit_code == 1);
    const auto v = run("validate-dist --config " + skew);
    CHECK(v.exit_code == 0);
    CHECK(nlohmann::json::parse(v.out)["result"]["pass"] == false);
    // a tree forced past its budget is a computational failure
    const auto cfg = write_config("budget", "solver: {kind: tree, n: 12, tree_budget: 1000}\n");
    CHECK(run("solve --config " + cfg).exit_code == 2);
}

TEST_CASE("flags override the file and the summary embeds the resolved config")
{
    const auto cfg = write_config("ov", "solver: {n: 4}\nsimulation: {paths: 1000, seed: 1}\n");
    const auto a = run("simulate --no-timestamp --n 2 --seed 5 --paths 500 --config " + cfg);
    REQUIRE(a.exit_code == 0);
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j["config"]["solver"]["n"] == 2);
    CHECK(j["config"]["simulation"]["seed"] == 5);
    CHECK(j["result"]["paths"] == 500);

    const auto embedded = write_config("emb", j["config"].dump());
    const auto b = run("simulate --no-timestamp --config " + embedded);
    CHECK(b.out == a.out);
}

TEST_CASE("output is identical across thread counts")
{
    const auto cfg = write_config("thr", "noise: {kind: normal}\nsolver: {n: 4}\nsimulation: {paths: 4000, "
                                         "mode: continuous, substeps: 4}\n");
    for (const char* cmd : {"solve", "simulate"}) {
        CAPTURE(cmd);
        const auto one = run(std::string(cmd) + " --no-timestamp --threads 1 --config " + cfg);
        const auto four = run(std::string(cmd) + " --no-timestamp --threads 4 --config " + cfg);
        REQUIRE(one.exit_code == 0);
        CHECK(one.out == four.out);
    }
}

TEST_CASE("simulate from a saved table matches a fresh solve")
{
    const auto cfg = write_config("tbl", "payoff: {family: call}\nsolver: {n: 6}\nsimulation: {paths: 2000}\n");
    const auto table = (std::filesystem::temp_directory_path() / "gexp_cli.tbl").string();
    REQUIRE(run("solve --no-timestamp --table-out " + table + " --config " + cfg).exit_code == 0);
    const auto fresh = run("simulate --no-timestamp --config " + cfg);
    const auto reused = run("simulate --no-timestamp --table " + table + " --config " + cfg);
    REQUIRE(reused.exit_code == 0);
    CHECK(fresh.out == reused.out);
    // a table solved for a different problem is refused
    const auto other = write_config("tbl2", "payoff: {family: square}\nsolver: {n: 6}\n");
    CHECK(run("simulate --table " + table + " --config " + other).exit_code == 1);
}

TEST_CASE("csv output and path dumps")
{
    const auto cfg = write_config("csv", "solver: {n: 3}\nsimulation: {paths: 50, dump_limit: 2}\n");
    const auto dump = (std::filesystem::temp_directory_path() / "gexp_cli_paths.csv").string();
    const auto r = run("simulate --format csv --dump-paths " + dump + " --config " + cfg);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("mode,n,value,mean,stderr", 0) == 0);
    std::ifstream in(dump);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 2 * 4); // header, two paths of n + 1 knots
}

TEST_CASE("oracle and converge subcommands")
{
    const auto cfg = write_config("orc", "payoff: {family: call}\noracle: {nx: 201, nt: 200}\n"
                                         "converge: {n_values: [2, 4, 8]}\n");
    const auto o = run("oracle --no-timestamp --config " + cfg);
    REQUIRE(o.exit_code == 0);
    const auto jo = nlohmann::json::parse(o.out);
    CHECK(jo["result"]["closed_form"].get<double>() == doctest::Approx(0.199471).epsilon(1e-5));
    const auto c = run("converge --no-timestamp --config " + cfg);
    REQUIRE(c.exit_code == 0);
    const auto jc = nlohmann::json::parse(c.out);
    CHECK(jc["result"]["rows"].size() == 3);
    CHECK_FALSE(jc["result"]["rows"][0].contains("runtime_seconds"));
}
