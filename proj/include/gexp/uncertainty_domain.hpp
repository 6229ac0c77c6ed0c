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
#include <variant>
#include <vector>

#include "gexp/sym_matrix.hpp"

namespace gexp {

// D = [a_low, a_high] for d = 1 (variances).
struct ScalarInterval {
    double a_low = 0.0;
    double a_high = 0.0;
};

// D = { s I : s in [a_low, a_high] }.
struct IsotropicInterval {
    int dim = 1;
    double a_low = 0.0;
    double a_high = 0.0;
};

// D = { diag(s_1..s_d) : s_i in [a_low[i], a_high[i]] }.
struct DiagonalBox {
    std::vector<double> a_low;
    std::vector<double> a_high;
};

// D = conv(generators), each generator positive semidefinite.
struct ConvexHull {
    std::vector<SymMatrix> generators;
};

/// Compact convex set of admissible volatility matrices.
///
/// All variants are validated on construction: nonempty, consistent
/// dimensions and positive semidefinite members.
class UncertaintyDomain {
public:
    using Variant = std::variant<ScalarInterval, IsotropicInterval, DiagonalBox, ConvexHull>;

    // The singleton {0} in dimension one.
    UncertaintyDomain() : UncertaintyDomain(ScalarInterval{}) {}
    explicit UncertaintyDomain(Variant v);

    static UncertaintyDomain scalar(double a_low, double a_high);
    static UncertaintyDomain isotropic(int dim, double a_low, double a_high);
    static UncertaintyDomain diagonal(std::vector<double> a_low, std::vector<double> a_high);
    static UncertaintyDomain hull(std::vector<SymMatrix> generators);

    const Variant& variant() const { return v_; }
    int dim() const { return dim_; }
    std::string kind_name() const;

    // sup over D of the operator norm.
    double norm() const { return norm_; }

    // True for variants whose members are all diagonal.
    bool is_diagonal() const;

    // Upper bound of each diagonal entry over D.
    std::vector<double> diagonal_upper() const;

    bool contains(const SymMatrix& a) const;

private:
    Variant v_;
    int dim_ = 1;
    double norm_ = 0.0;
};

// Finite set of controls in sqrt(D). `squares[i]` is controls[i]^2 and
// lies in D.
struct ControlGrid {
    std::vector<SymMatrix> controls;
    std::vector<SymMatrix> squares;
    int resolution = 1;

    int size() const { return static_cast<int>(controls.size()); }
    int dim() const { return controls.empty() ? 0 : controls.front().dim(); }
    // Index of the control whose square has the largest operator norm
    // (lowest index on ties).
    int max_control_index() const;
};

/// Discretizes sqrt(D) with `resolution` steps per free parameter.
///
/// Interval variants are spaced uniformly in volatility (sqrt space) except
/// IsotropicInterval, which is spaced uniformly in variance. Endpoints and
/// hull generators are always members. Hull grids use simplex-lattice
/// weights with step 1/resolution.
ControlGrid sqrt_grid(const UncertaintyDomain& domain, int resolution);

} // namespace gexp
