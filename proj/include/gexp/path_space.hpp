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

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "gexp/sym_matrix.hpp"

namespace gexp {

// A martingale path u and a quadratic-variation path v at the knots
// k = 0..steps, both starting at the origin.
struct DiscretePathPair {
    int steps = 0;
    int dim = 1;
    std::vector<Vec> u;
    std::vector<SymMatrix> v;

    static DiscretePathPair zeros(int steps, int dim);

    // Throws unless sizes match, u_0 = 0, v_0 = 0 and v has PSD increments.
    void validate() const;
};

/// Piecewise-linear interpolant of a knot pair on the grid {k / steps}.
///
/// Knot values are returned exactly; between knots the value is the affine
/// combination of the two neighbours. At t = 1 the index is clamped to the
/// last knot.
class InterpolatedPath {
public:
    explicit InterpolatedPath(DiscretePathPair knots);

    int steps() const { return knots_.steps; }
    int dim() const { return knots_.dim; }
    const DiscretePathPair& knots() const { return knots_; }

    // Mutable access for solvers that rewrite knots in place. Callers keep
    // u_0 = 0 and v_0 = 0.
    DiscretePathPair& mutable_knots() { return knots_; }

    const Vec& u_knot(int k) const { return knots_.u[k]; }
    const SymMatrix& v_knot(int k) const { return knots_.v[k]; }
    const Vec& u_final() const { return knots_.u.back(); }
    const SymMatrix& v_final() const { return knots_.v.back(); }

    Vec u_at(double t) const;
    SymMatrix v_at(double t) const;

private:
    // index [nt] clamped to steps - 1 and the weight on the right knot
    std::pair<int, double> locate(double t) const;

    DiscretePathPair knots_;
};

InterpolatedPath interpolate(DiscretePathPair path);

// (||u||_sup, ||v||_sup); attained at knots for piecewise-linear paths.
std::pair<double, double> sup_norm(const InterpolatedPath& path);

/// <M>_0 = 0 and <M>_k = (1/n) sum_{j <= k} phi_j^2.
std::vector<SymMatrix> predictable_variation(int n, std::span<const SymMatrix> controls);

// Rows: k, t, u components, v components row-major. With `path_index` >= 0
// a leading path column is written as well.
void write_csv_header(std::ostream& os, int dim, bool with_path_index, bool with_controls);
void write_csv_rows(std::ostream& os, const DiscretePathPair& path, long long path_index = -1,
                    std::span<const int> controls = {}, double payoff = 0.0);

} // namespace gexp
