#include "psmpm/sparse.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace psmpm {

SparsePattern::SparsePattern(const BasisSet& basis)
{
    const int n = basis.size();
    const Triangulation& tri = basis.mesh();
    nf_ = tri.num_elements() > 0 ? static_cast<int>(basis.element_functions(0).size()) : 0;
    nf2_ = nf_ * nf_;

    std::vector<std::vector<int>> adjacency(n);
    for (int e = 0; e < tri.num_elements(); ++e) {
        const auto fns = basis.element_functions(e);
        for (int f : fns)
            adjacency[f].insert(adjacency[f].end(), fns.begin(), fns.end());
    }
    row_start_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& adj = adjacency[i];
        adj.push_back(i);
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
        row_start_[i + 1] = row_start_[i] + static_cast<int>(adj.size());
    }
    cols_.reserve(row_start_[n]);
    diag_.resize(n);
    for (int i = 0; i < n; ++i) {
        diag_[i] = row_start_[i] + static_cast<int>(std::lower_bound(adjacency[i].begin(), adjacency[i].end(), i) -
                                                    adjacency[i].begin());
        cols_.insert(cols_.end(), adjacency[i].begin(), adjacency[i].end());
    }

    local_.resize(static_cast<std::size_t>(tri.num_elements()) * nf2_);
    for (int e = 0; e < tri.num_elements(); ++e) {
        const auto fns = basis.element_functions(e);
        for (int a = 0; a < nf_; ++a)
            for (int b = 0; b < nf_; ++b)
                local_[static_cast<std::size_t>(e) * nf2_ + a * nf_ + b] = find(fns[a], fns[b]);
    }
}

int SparsePattern::find(int row, int col) const
{
    const auto begin = cols_.begin() + row_start_[row];
    const auto end = cols_.begin() + row_start_[row + 1];
    const auto it = std::lower_bound(begin, end, col);
    return (it != end && *it == col) ? static_cast<int>(it - cols_.begin()) : -1;
}

double SparseMatrix::at(int row, int col) const
{
    const int pos = pattern_->find(row, col);
    return pos < 0 ? 0.0 : values_[pos];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    const auto& rs = pattern_->row_start();
    const auto& cols = pattern_->cols();
    for (int i = 0; i < rows(); ++i) {
        double s = 0.0;
        for (int k = rs[i]; k < rs[i + 1]; ++k)
            s += values_[k] * x[cols[k]];
        y[i] = s;
    }
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(rows());
    for (int i = 0; i < rows(); ++i)
        d[i] = values_[pattern_->diagonal_position(i)];
    return d;
}

std::vector<double> SparseMatrix::row_sums() const
{
    const auto& rs = pattern_->row_start();
    std::vector<double> s(rows(), 0.0);
    for (int i = 0; i < rows(); ++i)
        for (int k = rs[i]; k < rs[i + 1]; ++k)
            s[i] += values_[k];
    return s;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

} // namespace

SolveReport solve_cg(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                     const ConstrainedSpace& space, double tolerance, int max_iterations)
{
    const int n = a.rows();
    if (max_iterations < 0)
        max_iterations = 10 * n;
    const auto& xp = space.particular();
    // start from the incoming guess moved onto the affine set
    std::vector<double> r(n), z(n), p(n), q(n);
    for (int i = 0; i < n; ++i)
        r[i] = x[i] - xp[i];
    space.project(r);
    for (int i = 0; i < n; ++i)
        x[i] = xp[i] + r[i];

    std::vector<double> xp_copy(xp.begin(), xp.end());
    a.multiply(xp_copy, q);
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - q[i];
    space.project(r);
    const double rhs_norm = std::sqrt(dot(r, r));
    if (!std::isfinite(rhs_norm))
        throw SolverDiverged("non-finite right-hand side");
    if (rhs_norm == 0.0) {
        std::copy(xp.begin(), xp.end(), x.begin());
        return {};
    }
    a.multiply(x, q);
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - q[i];
    space.project(r);
    if (std::sqrt(dot(r, r)) < tolerance * rhs_norm)
        return {0, std::sqrt(dot(r, r)) / rhs_norm};

    std::vector<double> inv_diag = a.diagonal();
    for (auto& d : inv_diag)
        d = d > 0.0 ? 1.0 / d : 0.0;

    auto precondition = [&] {
        for (int i = 0; i < n; ++i)
            z[i] = inv_diag[i] * r[i];
        space.project(z);
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iterations; ++it) {
        a.multiply(p, q);
        space.project(q);
        const double pq = dot(p, q);
        if (!(pq > 0.0) || !std::isfinite(pq))
            throw SolverDiverged("matrix not positive definite on the free space (p.Ap = " + std::to_string(pq) +
                                 ")");
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        const double res = std::sqrt(dot(r, r)) / rhs_norm;
        if (!std::isfinite(res))
            throw SolverDiverged("non-finite residual");
        if (res < tolerance)
            return {it, res};
        precondition();
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    throw SolverDiverged("conjugate gradient stalled after " + std::to_string(max_iterations) + " iterations");
}

void solve_diagonal(std::span<const double> diag, std::span<const double> b, std::span<double> x,
                    const ConstrainedSpace& space)
{
    const int n = static_cast<int>(diag.size());
    for (int i = 0; i < n; ++i)
        x[i] = diag[i] > 0.0 ? b[i] / diag[i] : 0.0;

    const int fpv = space.functions_per_vertex();
    const auto& xp = space.particular();
    for (int vertex : space.constrained_vertices()) {
        const int base = vertex * fpv;
        const auto free = space.free_directions(vertex);
        // x_v = xp_v + T s with (T^T D T) s = T^T (b - D xp)
        const int k = static_cast<int>(free.size());
        Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(k, k);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
        for (int r = 0; r < k; ++r) {
            for (int j = 0; j < fpv; ++j)
                rhs[r] += free[r][j] * (b[base + j] - diag[base + j] * xp[base + j]);
            for (int c = 0; c < k; ++c)
                for (int j = 0; j < fpv; ++j)
                    reduced(r, c) += free[r][j] * diag[base + j] * free[c][j];
        }
        Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
        if (k > 0 && reduced.diagonal().maxCoeff() > 0.0)
            s = reduced.completeOrthogonalDecomposition().solve(rhs);
        for (int j = 0; j < fpv; ++j) {
            double v = xp[base + j];
            for (int r = 0; r < k; ++r)
                v += free[r][j] * s[r];
            x[base + j] = v;
        }
    }
}

} // namespace psmpm
