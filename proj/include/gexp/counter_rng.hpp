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

#include <array>
#include <cstdint>

namespace gexp {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stateless-per-index random stream.
///
/// Stream `(seed, stream_id)` is a pure function of its arguments: draw j of
/// stream s is the same no matter which thread produces it or in which
/// order streams are visited. Simulations give path i its own stream.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace gexp
