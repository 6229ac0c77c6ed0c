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

#include "gexp/path_space.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "gexp/errors.hpp"

namespace gexp {

DiscretePathPair DiscretePathPair::zeros(int steps, int dim)
{
    if (steps < 1) throw ValidationError("DiscretePathPair: steps must be >= 1");
    if (dim < 1) throw ValidationError("DiscretePathPair: dim must be >= 1");
    DiscretePathPair p;
    p.steps = steps;
    p.dim = dim;
    p.u.assign(static_cast<std::size_t>(steps + 1), Vec::Zero(dim));
    p.v.assign(static_cast<std::size_t>(steps + 1), SymMatrix(dim));
    return p;
}

void DiscretePathPair::validate() const
{
    if (steps < 1) throw ValidationError("DiscretePathPair: steps must be >= 1");
    if (u.size() != static_cast<std::size_t>(steps + 1) || v.size() != u.size())
        throw DimensionError("DiscretePathPair: expected steps + 1 knots");
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u[k].size() != dim || v[k].dim() != dim) throw DimensionError("DiscretePathPair: knot dimension mismatch");
    if (!u[0].isZero(0.0) || !v[0].matrix().isZero(0.0))
        throw ValidationError("DiscretePathPair: paths must start at the origin");
    for (int k = 0; k < steps; ++k)
        if (!is_psd(v[k + 1] - v[k])) throw ValidationError("DiscretePathPair: v increments must be PSD");
}

InterpolatedPath::InterpolatedPath(DiscretePathPair knots) : knots_(std::move(knots)) { knots_.validate(); }

std::pair<int, double> InterpolatedPath::locate(double t) const
{
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("InterpolatedPath: t must lie in [0, 1]");
    const double nt = knots_.steps * t;
    int k = static_cast<int>(std::floor(nt));
    if (k >= knots_.steps) return {knots_.steps - 1, 1.0};
    return {k, nt - k};
}

Vec InterpolatedPath::u_at(double t) const
{
    const auto [k, w] = locate(t);
    if (w == 0.0) return knots_.u[k];
    if (w == 1.0) return knots_.u[k + 1];
    return (1.0 - w) * knots_.u[k] + w * knots_.u[k + 1];
}

SymMatrix InterpolatedPath::v_at(double t) const
{
    const auto [k, w] = locate(t);
    if (w == 0.0) return knots_.v[k];
    if (w == 1.0) return knots_.v[k + 1];
    return (1.0 - w) * knots_.v[k] + w * knots_.v[k + 1];
}

InterpolatedPath interpolate(DiscretePathPair path) { return InterpolatedPath(std::move(path)); }

std::pair<double, double> sup_norm(const InterpolatedPath& path)
{
    double su = 0.0, sv = 0.0;
    for (int k = 0; k <= path.steps(); ++k) {
        su = std::max(su, sup_norm(path.u_knot(k)));
        sv = std::max(sv, operator_norm(path.v_knot(k)));
    }
    return {su, sv};
}

std::vector<SymMatrix> predictable_variation(int n, std::span<const SymMatrix> controls)
{
    if (n < 1) throw ValidationError("predictable_variation: n must be >= 1");
    if (controls.size() != static_cast<std::size_t>(n))
        throw DimensionError("predictable_variation: expected n controls");
    const int d = controls.front().dim();
    std::vector<SymMatrix> out;
    out.reserve(controls.size() + 1);
    out.emplace_back(d);
    for (const auto& phi : controls) {
        if (phi.dim() != d) throw DimensionError("predictable_variation: control dimension mismatch");
        out.push_back(out.back() + phi.squared() * (1.0 / n));
    }
    return out;
}

void write_csv_header(std::ostream& os, int dim, bool with_path_index, bool with_controls)
{
    if (with_path_index) os << "path,";
    os << "k,t";
    for (int i = 0; i < dim; ++i) os << ",u" << i;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) os << ",v" << i << j;
    if (with_controls) os << ",control,payoff";
    os << '\n';
}

void write_csv_rows(std::ostream& os, const DiscretePathPair& path, long long path_index, std::span<const int> controls,
                    double payoff)
{
    const auto old_prec = os.precision(17);
    for (int k = 0; k <= path.steps; ++k) {
        if (path_index >= 0) os << path_index << ',';
        os << k << ',' << static_cast<double>(k) / path.steps;
        for (int i = 0; i < path.dim; ++i) os << ',' << path.u[k](i);
        for (int i = 0; i < path.dim; ++i)
            for (int j = 0; j < path.dim; ++j) os << ',' << path.v[k](i, j);
        if (!controls.empty()) os << ',' << (k < static_cast<int>(controls.size()) ? controls[k] : -1) << ',' << payoff;
        os << '\n';
    }
    os.precision(old_prec);
}

} // namespace gexp
