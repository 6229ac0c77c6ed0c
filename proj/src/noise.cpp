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

#include "gexp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gexp/errors.hpp"

namespace gexp {

namespace {

QuadratureRule tensorize(const QuadratureRule& axis, int dim)
{
    QuadratureRule out;
    out.exactness_degree = axis.exactness_degree;
    const int m = axis.size();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        Vec x(dim);
        double w = 1.0;
        for (int i = 0; i < dim; ++i) {
            x(i) = axis.nodes[idx[i]](0);
            w *= axis.weights[idx[i]];
        }
        out.nodes.push_back(std::move(x));
        out.weights.push_back(w);
        int i = dim - 1;
        while (i >= 0 && ++idx[i] == m) idx[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

QuadratureRule rademacher_atoms(int dim)
{
    QuadratureRule axis;
    axis.nodes = {Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
    axis.weights = {0.5, 0.5};
    axis.exactness_degree = std::numeric_limits<int>::max();
    return tensorize(axis, dim);
}

double log_sum_exp(const std::vector<double>& logs)
{
    const double m = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double l : logs) s += std::exp(l - m);
    return m + std::log(s);
}

} // namespace

NoiseDistribution::NoiseDistribution(Variant v) : v_(std::move(v))
{
    if (const auto* n = std::get_if<StandardNormal>(&v_)) {
        if (n->dim < 1) throw ValidationError("StandardNormal: dim must be positive");
        dim_ = n->dim;
    } else if (const auto* r = std::get_if<Rademacher>(&v_)) {
        if (r->dim < 1 || r->dim > 16) throw ValidationError("Rademacher: dim must be in [1, 16]");
        dim_ = r->dim;
        atoms_ = rademacher_atoms(dim_);
    } else {
        const auto& f = std::get<FiniteSupport>(v_);
        if (f.points.empty() || f.points.size() != f.probabilities.size())
            throw ValidationError("FiniteSupport: points and probabilities must have equal nonzero length");
        dim_ = static_cast<int>(f.points.front().size());
        if (dim_ < 1) throw ValidationError("FiniteSupport: atoms must have positive dimension");
        double total = 0.0;
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            if (f.points[i].size() != dim_) throw DimensionError("FiniteSupport: atom dimensions differ");
            if (!(f.probabilities[i] > 0.0)) throw ValidationError("FiniteSupport: probabilities must be positive");
            total += f.probabilities[i];
        }
        if (std::abs(total - 1.0) > 1e-12) throw ValidationError("FiniteSupport: probabilities must sum to 1");
        atoms_.nodes = f.points;
        atoms_.weights = f.probabilities;
        atoms_.exactness_degree = std::numeric_limits<int>::max();
    }
}

NoiseDistribution NoiseDistribution::finite(std::vector<Vec> points, std::vector<double> probabilities)
{
    return NoiseDistribution(FiniteSupport{std::move(points), std::move(probabilities)});
}

std::string NoiseDistribution::kind_name() const
{
    if (std::holds_alternative<StandardNormal>(v_)) return "normal";
    if (std::holds_alternative<Rademacher>(v_)) return "rademacher";
    return "finite";
}

const QuadratureRule& NoiseDistribution::atoms() const
{
    if (!has_finite_support()) throw ValidationError("atoms: the normal law has no finite support");
    return atoms_;
}

Vec NoiseDistribution::draw(CounterStream& stream, int* atom_index) const
{
    if (std::holds_alternative<StandardNormal>(v_)) {
        Vec x(dim_);
        for (int i = 0; i < dim_; ++i) x(i) = stream.normal();
        if (atom_index) *atom_index = -1;
        return x;
    }
    int idx = 0;
    if (std::holds_alternative<Rademacher>(v_)) {
        const std::uint64_t bits = stream.next_u64();
        for (int i = 0; i < dim_; ++i) idx = (idx << 1) | static_cast<int>((bits >> (63 - i)) & 1u);
    } else {
        const double u = stream.uniform();
        double acc = 0.0;
        idx = atoms_.size() - 1;
        for (int i = 0; i < atoms_.size(); ++i) {
            acc += atoms_.weights[i];
            if (u < acc) {
                idx = i;
                break;
            }
        }
    }
    if (atom_index) *atom_index = idx;
    return atoms_.nodes[idx];
}

double NoiseDistribution::log_mgf(const Vec& y) const
{
    if (y.size() != dim_) throw DimensionError("log_mgf: argument dimension mismatch");
    if (std::holds_alternative<StandardNormal>(v_)) return 0.5 * y.squaredNorm();
    if (std::holds_alternative<Rademacher>(v_)) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
            // log cosh without overflow
            const double a = std::abs(y(i));
            s += a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
        }
        return s;
    }
    std::vector<double> logs;
    for (int i = 0; i < atoms_.size(); ++i) logs.push_back(std::log(atoms_.weights[i]) + atoms_.nodes[i].dot(y));
    return log_sum_exp(logs);
}

QuadratureRule gauss_hermite(int order)
{
    if (order < 1) throw ValidationError("gauss_hermite: order must be positive");
    // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jac(k, k - 1) = std::sqrt(static_cast<double>(k));
        jac(k - 1, k) = jac(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    QuadratureRule rule;
    rule.exactness_degree = 2 * order - 1;
    std::vector<double> x(order), w(order);
    for (int i = 0; i < order; ++i) {
        x[i] = es.eigenvalues()(i);
        w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
    // enforce exact symmetry of the rule
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double xs = 0.5 * (x[j] - x[i]);
        const double ws = 0.5 * (w[i] + w[j]);
        x[i] = -xs;
        x[j] = xs;
        w[i] = w[j] = ws;
    }
    if (order % 2 == 1) x[order / 2] = 0.0;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (int i = 0; i < order; ++i) {
        rule.nodes.push_back(Vec::Constant(1, x[i]));
        rule.weights.push_back(w[i] / total);
    }
    return rule;
}

QuadratureRule quadrature(const NoiseDistribution& nu, int order)
{
    if (order < 2) throw ValidationError("quadrature: order must be >= 2");
    if (nu.has_finite_support()) return nu.atoms();
    return tensorize(gauss_hermite(order), nu.dim());
}

namespace {

void fill_verdict(MomentReport& r, int dim)
{
    const double mean_err = r.mean.cwiseAbs().maxCoeff();
    const double cov_err = (r.covariance - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    std::ostringstream os;
    os << "max|mean|=" << mean_err << " max|cov-I|=" << cov_err;
    if (!std::isfinite(r.third_abs_moment)) os << " third moment not finite";
    r.detail = os.str();
}

} // namespace

MomentReport validate_moments(const NoiseDistribution& nu)
{
    const int d = nu.dim();
    MomentReport r;
    r.tolerance = 1e-10;
    const QuadratureRule rule = quadrature(nu, kDefaultQuadratureOrder);
    r.mean = Vec::Zero(d);
    r.covariance = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < rule.size(); ++i) {
        r.mean += rule.weights[i] * rule.nodes[i];
        r.covariance += rule.weights[i] * rule.nodes[i] * rule.nodes[i].transpose();
    }
    // sup-norm third moment is not polynomial; use a finer rule for the normal law
    const int fine_order = d <= 2 ? 40 : (d == 3 ? 16 : 8);
    const QuadratureRule fine = nu.has_finite_support() ? rule : quadrature(nu, fine_order);
    for (int i = 0; i < fine.size(); ++i) r.third_abs_moment += fine.weights[i] * std::pow(sup_norm(fine.nodes[i]), 3);

    fill_verdict(r, d);
    const double mean_err = r.mean.cwiseAbs().maxCoeff();
    const double cov_err = (r.covariance - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
    r.pass = mean_err <= r.tolerance && cov_err <= r.tolerance && std::isfinite(r.third_abs_moment);
    return r;
}

MomentReport validate_moments_sampled(const NoiseDistribution& nu, std::uint64_t seed, std::int64_t draws)
{
    if (draws < 2) throw ValidationError("validate_moments_sampled: needs at least 2 draws");
    const int d = nu.dim();
    const auto xs = sample(nu, seed, draws);
    const double n = static_cast<double>(draws);

    MomentReport r;
    r.sampled = true;
    r.draws = draws;
    r.tolerance = 4.0; // standard errors
    r.mean = Vec::Zero(d);
    r.covariance = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : xs) {
        r.mean += x;
        r.covariance += x * x.transpose();
        r.third_abs_moment += std::pow(sup_norm(x), 3);
    }
    r.mean /= n;
    r.covariance /= n;
    r.third_abs_moment /= n;

    // standard errors of the raw moment estimators
    Vec se_mean = Vec::Zero(d);
    Eigen::MatrixXd se_cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : xs) {
        for (int i = 0; i < d; ++i) {
            se_mean(i) += (x(i) - r.mean(i)) * (x(i) - r.mean(i));
            for (int j = 0; j < d; ++j) {
                const double dev = x(i) * x(j) - r.covariance(i, j);
                se_cov(i, j) += dev * dev;
            }
        }
    }
    se_mean = (se_mean / (n - 1.0) / n).cwiseSqrt();
    se_cov = (se_cov / (n - 1.0) / n).cwiseSqrt();

    bool ok = std::isfinite(r.third_abs_moment);
    for (int i = 0; i < d; ++i) {
        ok = ok && std::abs(r.mean(i)) <= 4.0 * se_mean(i);
        for (int j = 0; j < d; ++j) ok = ok && std::abs(r.covariance(i, j) - (i == j ? 1.0 : 0.0)) <= 4.0 * se_cov(i, j);
    }
    fill_verdict(r, d);
    r.pass = ok;
    return r;
}

MgfReport validate_mgf_bound(const NoiseDistribution& nu, double radius, int n_max)
{
    if (!(radius > 0.0)) throw ValidationError("validate_mgf_bound: radius must be positive");
    if (n_max < 1) throw ValidationError("validate_mgf_bound: n_max must be >= 1");
    const int d = nu.dim();
    const int per_axis = d == 1 ? 41 : d == 2 ? 21 : d == 3 ? 11 : 7;

    MgfReport r;
    r.radius = radius;
    r.n_max = n_max;
    const double log_threshold = radius * radius * d + std::log(10.0);
    r.threshold = std::exp(log_threshold);
    double best_log = -std::numeric_limits<double>::infinity();

    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<int> ns;
    for (int n = 1; n <= n_max; n *= 2) ns.push_back(n);
    while (true) {
        Vec y(d);
        for (int i = 0; i < d; ++i) y(i) = -radius + 2.0 * radius * idx[i] / (per_axis - 1);
        for (int n : ns) {
            const double lv = n * nu.log_mgf(y / std::sqrt(static_cast<double>(n)));
            if (lv > best_log) {
                best_log = lv;
                r.argmax_n = n;
            }
        }
        int i = d - 1;
        while (i >= 0 && ++idx[i] == per_axis) idx[i--] = 0;
        if (i < 0) break;
    }
    r.overflow = !(best_log < 700.0);
    r.max_value = r.overflow ? std::numeric_limits<double>::infinity() : std::exp(best_log);
    r.pass = !r.overflow && best_log <= log_threshold;
    std::ostringstream os;
    os << "n in {1,2,4,...," << ns.back() << "}, " << per_axis << " points per axis on the sup-norm ball of radius "
       << radius << "; only this compact set is checked";
    r.scope = os.str();
    return r;
}

std::vector<Vec> sample(const NoiseDistribution& nu, std::uint64_t seed, std::int64_t count)
{
    if (count < 0) throw ValidationError("sample: count must be nonnegative");
    std::vector<Vec> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < count; ++j) {
        CounterStream s(seed, static_cast<std::uint64_t>(j));
        out[j] = nu.draw(s);
    }
    return out;
}

} // namespace gexp
