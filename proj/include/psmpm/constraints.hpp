#pragma once

#include "psmpm/basis.hpp"

#include <span>
#include <vector>

namespace psmpm {

enum class Component { X = 0, Y = 1 };

/// Prescribed value of one field component at a boundary vertex. For
/// Powell-Sabin splines the derivative along the boundary tangent is
/// prescribed as well; the normal derivative stays free.
struct DirichletConstraint
{
    int vertex = -1;
    Component component = Component::X;
    double value = 0.0;
    Vec2 tangent = Vec2(1.0, 0.0);
    double tangential_value = 0.0;
};

/// sum_a coeffs[a] * c[functions[a]] = rhs for one component's coefficients.
struct ConstraintRow
{
    Component component = Component::X;
    int vertex = -1;
    std::vector<int> functions;
    std::vector<double> coeffs;
    double rhs = 0.0;
};

/// Hat basis: one value row per constraint. Powell-Sabin basis: a value row
/// over the vertex's three triplet alphas and a tangent row over
/// beta * r_x + gamma * r_y. Tangents must be unit length and axis-aligned
/// along a boundary edge of the vertex.
std::vector<ConstraintRow> dirichlet_constraints(const BasisSet& basis, std::span<const DirichletConstraint> spec);

/// Affine set of coefficient vectors of one component that satisfy a group
/// of constraint rows. Rows only couple the functions of one vertex, so the
/// set is stored as per-vertex orthonormal constrained directions plus a
/// minimum-norm particular solution.
class ConstrainedSpace
{
  public:
    ConstrainedSpace() = default;
    ConstrainedSpace(int size, int functions_per_vertex);

    /// Adds one row; linearly dependent rows are dropped, inconsistent ones
    /// throw InconsistentConstraints.
    void add_row(std::span<const int> functions, std::span<const double> coeffs, double rhs);
    void add_rows(std::span<const ConstraintRow> rows, Component component, bool homogeneous = false);
    /// Pins a single coefficient to zero.
    void fix_to_zero(int function);

    int size() const { return size_; }
    int functions_per_vertex() const { return fpv_; }
    /// Orthogonal projection onto the homogeneous constraint subspace.
    void project(std::span<double> x) const;
    /// Minimum-norm vector satisfying every row.
    const std::vector<double>& particular() const { return particular_; }
    bool constrained(int vertex) const { return !directions_[vertex].empty(); }
    const std::vector<int>& constrained_vertices() const { return vertices_; }
    /// Orthonormal basis of the free directions of a vertex block.
    std::vector<std::vector<double>> free_directions(int vertex) const;

  private:
    int size_ = 0;
    int fpv_ = 1;
    std::vector<std::vector<std::vector<double>>> directions_;
    std::vector<int> vertices_;
    std::vector<double> particular_;
};

} // namespace psmpm
