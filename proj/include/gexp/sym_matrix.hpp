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

#include <Eigen/Dense>

namespace gexp {

using Vec = Eigen::VectorXd;

// Relative tolerance for positive semidefiniteness and domain membership.
inline constexpr double kPsdTolerance = 1e-10;

// Symmetric d x d matrix. Every mutation writes both triangles so the
// stored entries are exactly symmetric.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int dim);

    // Accepts a matrix that is symmetric up to round-off (1e-12 relative)
    // and stores its exact symmetrization.
    static SymMatrix from_matrix(const Eigen::MatrixXd& m);
    static SymMatrix identity(int dim);
    static SymMatrix scalar(int dim, double s);
    static SymMatrix diagonal(std::span<const double> entries);

    int dim() const { return static_cast<int>(m_.rows()); }
    double operator()(int i, int j) const { return m_(i, j); }
    void set(int i, int j, double x);
    const Eigen::MatrixXd& matrix() const { return m_; }

    double trace() const { return m_.trace(); }
    bool is_diagonal(double tol = 0.0) const;

    // A * A, symmetrized.
    SymMatrix squared() const;

    // *this = a + b without reallocating when dimensions already match.
    void assign_sum(const SymMatrix& a, const SymMatrix& b) { m_.noalias() = a.m_ + b.m_; }

    SymMatrix& operator+=(const SymMatrix& o);
    SymMatrix& operator-=(const SymMatrix& o);
    SymMatrix& operator*=(double s);

    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
    friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
    friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

private:
    Eigen::MatrixXd m_;
};

// Sup norm on R^d.
inline double sup_norm(const Vec& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

// Operator norm induced by the sup norm: maximal absolute row sum.
double operator_norm(const SymMatrix& a);

double min_eigenvalue(const SymMatrix& a);

// True when every eigenvalue is >= -tol * max(1, ||a||).
bool is_psd(const SymMatrix& a, double tol = kPsdTolerance);

// Unique positive semidefinite square root. Eigenvalues within tolerance
// below zero are clamped; anything more negative throws NotPsdError.
SymMatrix matrix_sqrt(const SymMatrix& a);

} // namespace gexp
