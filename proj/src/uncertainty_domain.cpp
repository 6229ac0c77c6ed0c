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

#include "gexp/uncertainty_domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gexp/errors.hpp"

namespace gexp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_interval(double lo, double hi, const char* what)
{
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw ValidationError(std::string(what) + ": a_low and a_high must be finite");
    if (lo < 0.0) throw ValidationError(std::string(what) + ": a_low must be nonnegative");
    if (lo > hi) throw ValidationError(std::string(what) + ": a_low must not exceed a_high");
}

// Lawson-Hanson non-negative least squares: min ||A x - b|| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
{
    const Eigen::Index n = a.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff());

    auto solve_passive = [&]() {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = a.col(idx[c]);
        Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
        for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zs(c);
        return z;
    };

    for (int outer = 0; outer < 3 * n + 10; ++outer) {
        Eigen::VectorXd w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[j] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;

        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            Eigen::VectorXd z = solve_passive();
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && z(j) <= 0.0) feasible = false;
            if (feasible) {
                x = z;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[j] && x(j) <= 1e-15) {
                    passive[j] = false;
                    x(j) = 0.0;
                }
            }
        }
    }
    return x;
}

// Upper-triangle coordinates with off-diagonals weighted by sqrt(2), so the
// Euclidean norm equals the Frobenius norm.
Eigen::VectorXd vech(const SymMatrix& m)
{
    const int d = m.dim();
    Eigen::VectorXd out(d * (d + 1) / 2);
    int k = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out(k++) = (i == j ? 1.0 : std::sqrt(2.0)) * m(i, j);
    return out;
}

bool hull_contains(const ConvexHull& h, const SymMatrix& a)
{
    const auto m = static_cast<Eigen::Index>(h.generators.size());
    const Eigen::VectorXd target = vech(a);
    const Eigen::Index p = target.size();
    double scale = 1.0;
    for (const auto& g : h.generators) scale = std::max(scale, operator_norm(g));
    const double weight = 1e3 * scale;

    Eigen::MatrixXd lhs(p + 1, m);
    Eigen::VectorXd rhs(p + 1);
    for (Eigen::Index j = 0; j < m; ++j) {
        lhs.block(0, j, p, 1) = vech(h.generators[j]);
        lhs(p, j) = weight;
    }
    rhs.head(p) = target;
    rhs(p) = weight;

    const Eigen::VectorXd lambda = nnls(lhs, rhs);
    const double residual = (lhs.topRows(p) * lambda - target).norm();
    const double sum_error = std::abs(lambda.sum() - 1.0);
    return residual <= 1e-8 * scale && sum_error <= 1e-8;
}

void enumerate_compositions(int parts, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int i = total; i >= 0; --i) {
        cur.push_back(i);
        enumerate_compositions(parts - 1, total - i, cur, out);
        cur.pop_back();
    }
}

} // namespace

UncertaintyDomain::UncertaintyDomain(Variant v) : v_(std::move(v))
{
    std::visit(overloaded{
                   [&](const ScalarInterval& s) {
                       check_interval(s.a_low, s.a_high, "ScalarInterval");
                       dim_ = 1;
                       norm_ = s.a_high;
                   },
                   [&](const IsotropicInterval& s) {
                       if (s.dim < 1) throw ValidationError("IsotropicInterval: dim must be positive");
                       check_interval(s.a_low, s.a_high, "IsotropicInterval");
                       dim_ = s.dim;
                       norm_ = s.a_high;
                   },
                   [&](const DiagonalBox& b) {
                       if (b.a_low.empty() || b.a_low.size() != b.a_high.size())
                           throw ValidationError("DiagonalBox: a_low and a_high must have equal nonzero length");
                       dim_ = static_cast<int>(b.a_low.size());
                       norm_ = 0.0;
                       for (std::size_t i = 0; i < b.a_low.size(); ++i) {
                           check_interval(b.a_low[i], b.a_high[i], "DiagonalBox");
                           norm_ = std::max(norm_, b.a_high[i]);
                       }
                   },
                   [&](const ConvexHull& h) {
                       if (h.generators.empty()) throw ValidationError("ConvexHull: needs at least one generator");
                       dim_ = h.generators.front().dim();
                       norm_ = 0.0;
                       for (const auto& g : h.generators) {
                           if (g.dim() != dim_) throw DimensionError("ConvexHull: generator dimensions differ");
                           if (!is_psd(g)) throw NotPsdError("ConvexHull: generator is not positive semidefinite");
                           // the operator norm is convex, so its max over the hull sits at a generator
                           norm_ = std::max(norm_, operator_norm(g));
                       }
                   },
               },
               v_);
}

UncertaintyDomain UncertaintyDomain::scalar(double a_low, double a_high)
{
    return UncertaintyDomain(ScalarInterval{a_low, a_high});
}

UncertaintyDomain UncertaintyDomain::isotropic(int dim, double a_low, double a_high)
{
    return UncertaintyDomain(IsotropicInterval{dim, a_low, a_high});
}

UncertaintyDomain UncertaintyDomain::diagonal(std::vector<double> a_low, std::vector<double> a_high)
{
    return UncertaintyDomain(DiagonalBox{std::move(a_low), std::move(a_high)});
}

UncertaintyDomain UncertaintyDomain::hull(std::vector<SymMatrix> generators)
{
    return UncertaintyDomain(ConvexHull{std::move(generators)});
}

std::string UncertaintyDomain::kind_name() const
{
    return std::visit(overloaded{
                          [](const ScalarInterval&) { return std::string("scalar"); },
                          [](const IsotropicInterval&) { return std::string("isotropic"); },
                          [](const DiagonalBox&) { return std::string("diagonal"); },
                          [](const ConvexHull&) { return std::string("hull"); },
                      },
                      v_);
}

bool UncertaintyDomain::is_diagonal() const
{
    if (const auto* h = std::get_if<ConvexHull>(&v_)) {
        return std::all_of(h->generators.begin(), h->generators.end(),
                           [](const SymMatrix& g) { return g.is_diagonal(); });
    }
    return true;
}

std::vector<double> UncertaintyDomain::diagonal_upper() const
{
    std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
    std::visit(overloaded{
                   [&](const ScalarInterval& s) { out[0] = s.a_high; },
                   [&](const IsotropicInterval& s) { std::fill(out.begin(), out.end(), s.a_high); },
                   [&](const DiagonalBox& b) { out = b.a_high; },
                   [&](const ConvexHull& h) {
                       for (const auto& g : h.generators)
                           for (int i = 0; i < dim_; ++i) out[i] = std::max(out[i], g(i, i));
                   },
               },
               v_);
    return out;
}

bool UncertaintyDomain::contains(const SymMatrix& a) const
{
    if (a.dim() != dim_) throw DimensionError("contains: matrix dimension does not match the domain");
    const double tol = kPsdTolerance * std::max(1.0, norm_);
    auto in = [tol](double x, double lo, double hi) { return x >= lo - tol && x <= hi + tol; };
    return std::visit(overloaded{
                          [&](const ScalarInterval& s) { return in(a(0, 0), s.a_low, s.a_high); },
                          [&](const IsotropicInterval& s) {
                              if (!a.is_diagonal(tol)) return false;
                              const double s0 = a(0, 0);
                              for (int i = 1; i < dim_; ++i)
                                  if (std::abs(a(i, i) - s0) > tol) return false;
                              return in(s0, s.a_low, s.a_high);
                          },
                          [&](const DiagonalBox& b) {
                              if (!a.is_diagonal(tol)) return false;
                              for (int i = 0; i < dim_; ++i)
                                  if (!in(a(i, i), b.a_low[i], b.a_high[i])) return false;
                              return true;
                          },
                          [&](const ConvexHull& h) { return is_psd(a) && hull_contains(h, a); },
                      },
                      v_);
}

int ControlGrid::max_control_index() const
{
    int best = 0;
    double best_norm = -1.0;
    for (int i = 0; i < size(); ++i) {
        const double nrm = operator_norm(squares[i]);
        if (nrm > best_norm) {
            best_norm = nrm;
            best = i;
        }
    }
    return best;
}

ControlGrid sqrt_grid(const UncertaintyDomain& domain, int resolution)
{
    if (resolution < 1) throw ValidationError("sqrt_grid: resolution must be >= 1");
    ControlGrid grid;
    grid.resolution = resolution;
    const int d = domain.dim();

    // uniform in volatility, endpoints exact; collapses for a degenerate interval
    auto vol_points = [resolution](double a_low, double a_high) {
        std::vector<double> pts;
        const double lo = std::sqrt(a_low), hi = std::sqrt(a_high);
        if (a_low == a_high) return std::vector<double>{lo};
        for (int j = 0; j <= resolution; ++j)
            pts.push_back(j == resolution ? hi : std::min(hi, lo + j * (hi - lo) / resolution));
        return pts;
    };
    auto push = [&grid](SymMatrix gamma) {
        grid.squares.push_back(gamma.squared());
        grid.controls.push_back(std::move(gamma));
    };

    std::visit(overloaded{
                   [&](const ScalarInterval& s) {
                       for (double g : vol_points(s.a_low, s.a_high)) push(SymMatrix::scalar(1, g));
                   },
                   [&](const IsotropicInterval& s) {
                       if (s.a_low == s.a_high) {
                           push(SymMatrix::scalar(d, std::sqrt(s.a_low)));
                           return;
                       }
                       for (int j = 0; j <= resolution; ++j) {
                           const double var = j == resolution ? s.a_high
                                                              : s.a_low + j * (s.a_high - s.a_low) / resolution;
                           push(SymMatrix::scalar(d, std::sqrt(var)));
                       }
                   },
                   [&](const DiagonalBox& b) {
                       std::vector<std::vector<double>> axes;
                       for (int i = 0; i < d; ++i) axes.push_back(vol_points(b.a_low[i], b.a_high[i]));
                       std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
                       while (true) {
                           std::vector<double> diag(static_cast<std::size_t>(d));
                           for (int i = 0; i < d; ++i) diag[i] = axes[i][idx[i]];
                           push(SymMatrix::diagonal(diag));
                           int i = d - 1;
                           while (i >= 0 && ++idx[i] == axes[i].size()) idx[i--] = 0;
                           if (i < 0) break;
                       }
                   },
                   [&](const ConvexHull& h) {
                       const int m = static_cast<int>(h.generators.size());
                       std::vector<std::vector<int>> weights;
                       std::vector<int> cur;
                       enumerate_compositions(m, resolution, cur, weights);
                       for (const auto& w : weights) {
                           SymMatrix comb(d);
                           for (int i = 0; i < m; ++i)
                               if (w[i] != 0) comb += h.generators[i] * (static_cast<double>(w[i]) / resolution);
                           push(matrix_sqrt(comb));
                       }
                   },
               },
               domain.variant());
    return grid;
}

} // namespace gexp
