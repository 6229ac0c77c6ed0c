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

#include "gexp/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "gexp/errors.hpp"

namespace gexp {

StateLattice::StateLattice(std::vector<LatticeAxis> axes) : axes_(std::move(axes))
{
    if (axes_.empty() || axes_.size() > 12) throw ValidationError("StateLattice: rank must be in [1, 12]");
    strides_.assign(axes_.size(), 1);
    size_ = 1;
    for (int a = rank() - 1; a >= 0; --a) {
        const auto& ax = axes_[a];
        if (ax.points < 1 || !(ax.hi >= ax.lo)) throw ValidationError("StateLattice: invalid axis");
        if (ax.points > 1 && !(ax.hi > ax.lo)) throw ValidationError("StateLattice: degenerate axis with several points");
        strides_[a] = size_;
        size_ *= static_cast<std::size_t>(ax.points);
    }
}

void StateLattice::coords(std::size_t node, std::span<double> out) const
{
    for (int a = 0; a < rank(); ++a) out[a] = axes_[a].coord(axis_index(node, a));
}

double StateLattice::excess_cells(std::span<const double> x) const
{
    double worst = 0.0;
    for (int a = 0; a < rank(); ++a) {
        const auto& ax = axes_[a];
        if (ax.points == 1) continue;
        const double h = ax.step();
        if (x[a] < ax.lo) worst = std::max(worst, (ax.lo - x[a]) / h);
        if (x[a] > ax.hi) worst = std::max(worst, (x[a] - ax.hi) / h);
    }
    return worst;
}

double StateLattice::interpolate(std::span<const double> values, std::span<const double> x) const
{
    // per-axis base node and weight of the upper neighbour (may leave [0, 1])
    std::size_t base = 0;
    double w[12];
    std::size_t step[12];
    int active = 0;
    for (int a = 0; a < rank(); ++a) {
        const auto& ax = axes_[a];
        if (ax.points == 1) continue;
        const double h = ax.step();
        const double s = (x[a] - ax.lo) / h;
        int i = static_cast<int>(std::floor(s));
        i = std::clamp(i, 0, ax.points - 2);
        base += static_cast<std::size_t>(i) * strides_[a];
        w[active] = s - i;
        step[active] = strides_[a];
        ++active;
    }
    double acc = 0.0;
    const unsigned corners = 1u << active;
    for (unsigned mask = 0; mask < corners; ++mask) {
        double coef = 1.0;
        std::size_t node = base;
        for (int j = 0; j < active; ++j) {
            if (mask & (1u << j)) {
                coef *= w[j];
                node += step[j];
            } else {
                coef *= 1.0 - w[j];
            }
        }
        acc += coef * values[node];
    }
    return acc;
}

StateLattice StateLattice::refined() const
{
    std::vector<LatticeAxis> axes = axes_;
    for (auto& ax : axes)
        if (ax.points > 1) ax.points = 2 * ax.points - 1;
    return StateLattice(std::move(axes));
}

} // namespace gexp
