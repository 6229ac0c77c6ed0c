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

#include <span>
#include <vector>

namespace gexp {

struct LatticeAxis {
    double lo = 0.0;
    double hi = 0.0;
    int points = 1;

    double step() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
    double coord(int i) const { return points > 1 ? (i == points - 1 ? hi : lo + i * step()) : lo; }
};

/// Rectangular grid with row-major node numbering (last axis fastest) and
/// multilinear interpolation. Outside the box the boundary cell is
/// extrapolated linearly.
class StateLattice {
public:
    StateLattice() = default;
    explicit StateLattice(std::vector<LatticeAxis> axes);

    int rank() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return size_; }
    const std::vector<LatticeAxis>& axes() const { return axes_; }
    std::size_t stride(int axis) const { return strides_[axis]; }

    void coords(std::size_t node, std::span<double> out) const;
    int axis_index(std::size_t node, int axis) const
    {
        return static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(axes_[axis].points));
    }

    // Largest distance outside the box, in cells of the offending axis
    // (0 when x is inside).
    double excess_cells(std::span<const double> x) const;

    double interpolate(std::span<const double> values, std::span<const double> x) const;

    // Same grid with every non-degenerate axis refined by 2x (2p - 1 points).
    StateLattice refined() const;

private:
    std::vector<LatticeAxis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

} // namespace gexp
