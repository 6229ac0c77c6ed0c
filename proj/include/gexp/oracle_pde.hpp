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

#include <functional>
#include <string>

namespace gexp {

using TerminalFn = std::function<double(double)>;

// Finite-difference grid for the one-dimensional extremal-volatility PDE
//   w_t + 1/2 sup_{a_low <= s <= a_high} s w_xx = 0,  w(1, x) = g(x).
struct PdeGrid {
    double x_min = -3.0;
    double x_max = 3.0;
    int nx = 801;
    int nt = 2000;
    double theta = 0.5;
    int rannacher_steps = 2; // leading fully implicit half-steps when theta < 1

    static PdeGrid standard(double a_high);
    PdeGrid refined() const; // half the spacing in x and t
    void validate(double a_high) const;
};

struct PdeSolution {
    double value = 0.0;
    double richardson_error = -1.0; // negative when not computed
    int max_sweeps = 0;             // worst policy-iteration count over steps
};

/// w(0, 0) by theta-stepping with policy iteration on the sign of w_xx.
/// Boundary nodes keep w_xx = 0, so they hold their terminal values.
PdeSolution solve_barenblatt(const TerminalFn& g, double a_low, double a_high, const PdeGrid& grid);

/// Solves on `grid` and on its refinement; error = |fine - coarse| / 3.
PdeSolution solve_barenblatt_richardson(const TerminalFn& g, double a_low, double a_high, const PdeGrid& grid);

enum class Shape { Convex, Concave };

Shape shape_from_string(const std::string& s);

/// E g(sqrt(a) Z) with a = a_high for convex and a_low for concave g.
/// The shape declaration is trusted.
double closed_form_extremal(const TerminalFn& g, Shape shape, double a_low, double a_high);

} // namespace gexp
