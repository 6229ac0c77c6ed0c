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

#include "gexp/sym_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gexp/errors.hpp"

namespace gexp {

SymMatrix::SymMatrix(int dim) : m_(Eigen::MatrixXd::Zero(dim, dim))
{
    if (dim < 1) throw DimensionError("SymMatrix: dimension must be positive");
}

SymMatrix SymMatrix::from_matrix(const Eigen::MatrixXd& m)
{
    if (m.rows() != m.cols() || m.rows() < 1)
        throw DimensionError("SymMatrix: matrix must be square and non-empty");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ValidationError("SymMatrix: matrix is not symmetric");
    SymMatrix s;
    s.m_ = 0.5 * (m + m.transpose());
    return s;
}

SymMatrix SymMatrix::identity(int dim) { return scalar(dim, 1.0); }

SymMatrix SymMatrix::scalar(int dim, double s)
{
    SymMatrix r(dim);
    r.m_.diagonal().setConstant(s);
    return r;
}

SymMatrix SymMatrix::diagonal(std::span<const double> entries)
{
    SymMatrix r(static_cast<int>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) r.m_(i, i) = entries[i];
    return r;
}

void SymMatrix::set(int i, int j, double x)
{
    m_(i, j) = x;
    m_(j, i) = x;
}

bool SymMatrix::is_diagonal(double tol) const
{
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j)
            if (i != j && std::abs(m_(i, j)) > tol) return false;
    return true;
}

SymMatrix SymMatrix::squared() const
{
    const Eigen::MatrixXd p = m_ * m_;
    SymMatrix r;
    r.m_ = 0.5 * (p + p.transpose());
    return r;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o)
{
    if (o.dim() != dim()) throw DimensionError("SymMatrix: dimension mismatch in +");
    m_ += o.m_;
    return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o)
{
    if (o.dim() != dim()) throw DimensionError("SymMatrix: dimension mismatch in -");
    m_ -= o.m_;
    return *this;
}

SymMatrix& SymMatrix::operator*=(double s)
{
    m_ *= s;
    return *this;
}

double operator_norm(const SymMatrix& a)
{
    return a.matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

double min_eigenvalue(const SymMatrix& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_psd(const SymMatrix& a, double tol)
{
    return min_eigenvalue(a) >= -tol * std::max(1.0, operator_norm(a));
}

SymMatrix matrix_sqrt(const SymMatrix& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.matrix());
    if (es.info() != Eigen::Success) throw ComputationError("matrix_sqrt: eigendecomposition failed");
    const double tol = kPsdTolerance * std::max(1.0, operator_norm(a));
    Eigen::VectorXd lambda = es.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -tol)
            throw NotPsdError("matrix_sqrt: eigenvalue " + std::to_string(lambda(i)) + " is negative");
        lambda(i) = std::sqrt(std::max(0.0, lambda(i)));
    }
    const Eigen::MatrixXd& q = es.eigenvectors();
    return SymMatrix::from_matrix(q * lambda.asDiagonal() * q.transpose());
}

} // namespace gexp
