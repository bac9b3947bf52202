#pragma once

#include "psmpm/basis.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace psmpm {

struct BasisCheckOptions
{
    /// Random interior points for partition of unity, sign, gradient sum
    /// and linear reproduction.
    int interior_samples = 1000;
    /// Random interior points for the finite-difference gradient check.
    int gradient_samples = 100;
    /// Random points on shared sub-triangle edges for the C1 check.
    int edge_samples = 200;
    /// Points per element edge for the molecule-boundary check.
    int boundary_samples_per_edge = 4;
    std::uint64_t seed = 1;
};

/// Worst observed deviation of each property.
struct BasisCheckReport
{
    double partition_of_unity = 0.0; ///< max |sum phi - 1|
    double gradient_sum = 0.0;       ///< max |sum grad phi| times mesh scale
    double min_value = 0.0;          ///< min phi
    double edge_value_jump = 0.0;    ///< max value mismatch across sub-triangle edges
    double edge_gradient_jump = 0.0; ///< max gradient mismatch, relative to max(1, |grad|)
    double molecule_boundary = 0.0;  ///< max |phi|, |grad phi| on molecule boundaries
    double linear_reproduction = 0.0;
    double gradient_fd = 0.0; ///< max FD mismatch, relative to max(1, |grad|)
    int edge_samples = 0;

    /// One message per property beyond its tolerance.
    std::vector<std::string> violations() const;
    bool passed() const { return violations().empty(); }
};

/// Value of the a-th function of element e on the polynomial piece of
/// sub-triangle s, extrapolated to p when p lies outside it.
double piece_value(const PsBasis& basis, int e, int s, int a, const Vec2& p);

BasisCheckReport check_basis(const PsBasis& basis, const BasisCheckOptions& options = {});

/// vertex,q0x,q0y,q1x,q1y,q2x,q2y,area
void write_control_triangles_csv(const PsBasis& basis, const std::filesystem::path& path);
/// vertex,k,alpha,beta,gamma
void write_triplets_csv(const PsBasis& basis, const std::filesystem::path& path);

} // namespace psmpm
