#include "psmpm/constraints.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psmpm {

namespace {

bool axis_aligned(const Vec2& r)
{
    const double ax = std::abs(r.x());
    const double ay = std::abs(r.y());
    return (ax < 1e-12 && std::abs(ay - 1.0) < 1e-12) || (ay < 1e-12 && std::abs(ax - 1.0) < 1e-12);
}

bool tangent_matches_boundary(const Triangulation& tri, int vertex, const Vec2& r)
{
    for (const auto& be : tri.boundary_edges()) {
        if (be.a != vertex && be.b != vertex)
            continue;
        const Vec2 d = (tri.nodes()[be.b] - tri.nodes()[be.a]).normalized();
        if (std::abs(d.x() * r.y() - d.y() * r.x()) < 1e-9)
            return true;
    }
    return false;
}

} // namespace

std::vector<ConstraintRow> dirichlet_constraints(const BasisSet& basis, std::span<const DirichletConstraint> spec)
{
    const Triangulation& tri = basis.mesh();
    std::vector<ConstraintRow> rows;
    const auto* ps = dynamic_cast<const PsBasis*>(&basis);
    for (const auto& c : spec) {
        if (c.vertex < 0 || c.vertex >= tri.num_nodes())
            throw ValidationError("constraint vertex " + std::to_string(c.vertex) + " out of range");
        if (!tri.is_boundary_vertex(c.vertex))
            throw InteriorVertexConstrained("vertex " + std::to_string(c.vertex));
        if (std::abs(c.tangent.norm() - 1.0) > 1e-12)
            throw ValidationError("boundary tangent must have unit length");
        if (!axis_aligned(c.tangent))
            throw UnsupportedBoundary("only axis-aligned boundary tangents are supported");
        if (!tangent_matches_boundary(tri, c.vertex, c.tangent))
            throw UnsupportedBoundary("tangent not aligned with a boundary edge at vertex " + std::to_string(c.vertex));

        if (!ps) {
            rows.push_back({c.component, c.vertex, {c.vertex}, {1.0}, c.value});
            continue;
        }
        const auto& tr = ps->triplets(c.vertex);
        ConstraintRow value{c.component, c.vertex, {}, {}, c.value};
        ConstraintRow tangent{c.component, c.vertex, {}, {}, c.tangential_value};
        for (int q = 0; q < 3; ++q) {
            value.functions.push_back(3 * c.vertex + q);
            value.coeffs.push_back(tr[q].alpha);
            tangent.functions.push_back(3 * c.vertex + q);
            tangent.coeffs.push_back(tr[q].beta * c.tangent.x() + tr[q].gamma * c.tangent.y());
        }
        rows.push_back(std::move(value));
        rows.push_back(std::move(tangent));
    }
    return rows;
}

// ---------------------------------------------------------------------------

ConstrainedSpace::ConstrainedSpace(int size, int functions_per_vertex)
    : size_(size), fpv_(functions_per_vertex), directions_(size / functions_per_vertex),
      particular_(static_cast<std::size_t>(size), 0.0)
{}

void ConstrainedSpace::add_row(std::span<const int> functions, std::span<const double> coeffs, double rhs)
{
    if (functions.empty())
        return;
    const int vertex = functions[0] / fpv_;
    std::vector<double> u(fpv_, 0.0);
    for (std::size_t a = 0; a < functions.size(); ++a) {
        if (functions[a] / fpv_ != vertex)
            throw ValidationError("constraint row spans several vertices");
        u[functions[a] % fpv_] += coeffs[a];
    }
    const double scale = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
    if (scale == 0.0)
        return;

    // current value of the row at the particular solution
    double r = rhs;
    for (int j = 0; j < fpv_; ++j)
        r -= u[j] * particular_[vertex * fpv_ + j];
    auto& dirs = directions_[vertex];
    for (const auto& q : dirs) {
        const double d = std::inner_product(u.begin(), u.end(), q.begin(), 0.0);
        for (int j = 0; j < fpv_; ++j)
            u[j] -= d * q[j];
    }
    const double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
    if (norm <= 1e-10 * scale) {
        if (std::abs(r) > 1e-10 * (std::abs(rhs) + 1.0))
            throw InconsistentConstraints("conflicting rows at vertex " + std::to_string(vertex));
        return;
    }
    for (auto& x : u)
        x /= norm;
    // the correction along the new direction fixes the residual without
    // disturbing earlier rows, which are orthogonal to it
    const double s = r / norm;
    for (int j = 0; j < fpv_; ++j)
        particular_[vertex * fpv_ + j] += s * u[j];
    if (dirs.empty())
        vertices_.push_back(vertex);
    dirs.push_back(std::move(u));
}

void ConstrainedSpace::add_rows(std::span<const ConstraintRow> rows, Component component, bool homogeneous)
{
    for (const auto& row : rows)
        if (row.component == component)
            add_row(row.functions, row.coeffs, homogeneous ? 0.0 : row.rhs);
}

void ConstrainedSpace::fix_to_zero(int function)
{
    const int f[1] = {function};
    const double c[1] = {1.0};
    // a pinned coefficient may coincide with a prescribed non-zero value;
    // the Dirichlet row wins in that case
    try {
        add_row(f, c, 0.0);
    } catch (const InconsistentConstraints&) {
    }
}

void ConstrainedSpace::project(std::span<double> x) const
{
    for (int vertex : vertices_) {
        double* block = x.data() + static_cast<std::ptrdiff_t>(vertex) * fpv_;
        for (const auto& q : directions_[vertex]) {
            double d = 0.0;
            for (int j = 0; j < fpv_; ++j)
                d += q[j] * block[j];
            for (int j = 0; j < fpv_; ++j)
                block[j] -= d * q[j];
        }
    }
}

std::vector<std::vector<double>> ConstrainedSpace::free_directions(int vertex) const
{
    std::vector<std::vector<double>> basis;
    for (int k = 0; k < fpv_; ++k) {
        std::vector<double> u(fpv_, 0.0);
        u[k] = 1.0;
        auto orthogonalize = [&](const std::vector<std::vector<double>>& set) {
            for (const auto& q : set) {
                const double d = std::inner_product(u.begin(), u.end(), q.begin(), 0.0);
                for (int j = 0; j < fpv_; ++j)
                    u[j] -= d * q[j];
            }
        };
        orthogonalize(directions_[vertex]);
        orthogonalize(basis);
        const double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
        if (norm > 1e-8) {
            for (auto& x : u)
                x /= norm;
            basis.push_back(std::move(u));
        }
    }
    return basis;
}

} // namespace psmpm
