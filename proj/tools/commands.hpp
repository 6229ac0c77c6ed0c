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

#include <optional>
#include <string>

#include "gexp/config.hpp"

namespace gexp::cli {

inline constexpr int kSchemaVersion = 1;

struct Options {
    std::string command;
    bool no_timestamp = false;
    std::optional<std::string> out;
    std::optional<std::string> dump_paths;
    std::optional<std::string> table_out;
    std::optional<std::string> table_in;
};

// Runs one subcommand on a fully validated config and writes its outputs.
// Errors propagate as exceptions; the caller maps them to exit codes.
void run_command(const Options& opt, const RunConfig& config);

} // namespace gexp::cli
