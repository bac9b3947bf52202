#pragma once

#include "psmpm/geometry.hpp"
#include "psmpm/mesh.hpp"
#include "psmpm/meshgen.hpp"

#include <functional>
#include <vector>

namespace psmpm {

struct Particle
{
    Vec2 x = Vec2::Zero();  ///< current position
    Vec2 x0 = Vec2::Zero(); ///< reference position
    Vec2 u = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    Mat2 D = Mat2::Identity();
    Mat2 sigma = Mat2::Zero();
    double volume = 0.0;
    double volume0 = 0.0;
    double density = 0.0;
    double mass = 0.0;
};

/// nx x ny particles at the cell centres of a uniform lattice over `region`,
/// each carrying an equal share of its area. Throws ParticleOutsideMesh if a
/// particle misses the mesh.
std::vector<Particle> lattice_particles(const Triangulation& mesh, const Rect& region, int nx, int ny,
                                        double density);

/// `ppe` particles in every selected element, each with volume area / ppe.
/// ppe = k^2 places one particle at the centroid of each of the k^2
/// similar sub-triangles of a uniform k-subdivision; ppe = 3 k^2 places the
/// three points (2/3, 1/6, 1/6) of each sub-triangle instead. Other counts
/// throw ValidationError.
std::vector<Particle> per_element_particles(const Triangulation& mesh, int ppe, double density,
                                            const std::function<bool(int)>& include_element = {});

/// Barycentric positions of the per-element layout.
std::vector<Vec3> per_element_layout(int ppe);

double total_mass(const std::vector<Particle>& particles);

} // namespace psmpm
