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

#include <string>

#include "gexp/config.hpp"
#include "gexp/dp_solver.hpp"

namespace gexp {

// Policy table file: magic "GEXPTBL\0", format version, the resolved config
// as JSON, then the value and control tables. Numbers are stored in host
// byte order.
inline constexpr std::uint32_t kTableVersion = 1;

void write_table(const std::string& path, const RunConfig& config, const ValueAndPolicy& vp);

struct LoadedTable {
    RunConfig config;
    ValueAndPolicy vp;
};

/// Reads a table and rebuilds the domain, control grid and quadrature from
/// the embedded config. Throws ValidationError when the file is malformed
/// or the rebuilt grids differ from the stored ones.
LoadedTable read_table(const std::string& path);

} // namespace gexp
