#pragma once

#include "psmpm/basis.hpp"
#include "psmpm/constraints.hpp"
#include "psmpm/material.hpp"
#include "psmpm/meshgen.hpp"
#include "psmpm/particles.hpp"
#include "psmpm/sparse.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace psmpm {

enum class MassMode { Consistent, Lumped, PartialLumped };

std::string to_string(MassMode mode);
MassMode mass_mode_from_string(const std::string& name);

/// Per-component coefficient vectors.
using FieldCoefficients = std::array<std::vector<double>, 2>;

/// Basis evaluations of every particle at its current position. Throws
/// ParticleOutsideMesh.
std::vector<BasisEval> evaluate_particles(const std::vector<Particle>& particles, const BasisSet& basis);

struct GridSystem
{
    MassMode mode = MassMode::Consistent;
    /// Assembled mass matrix; diagonal in Lumped mode.
    SparseMatrix mass;
    /// Consistent row sums.
    std::vector<double> lumped;
    /// Rows replaced by their row sum (PartialLumped) or all rows (Lumped).
    std::vector<char> lumped_rows;
    std::vector<int> particles_per_element;
    double mean_particle_mass = 0.0;

    FieldCoefficients f_int;
    FieldCoefficients f_body;
    FieldCoefficients f_trac;

    /// DOFs whose lumped mass is below 1e-12 of the mean particle mass.
    std::vector<int> zero_mass_dofs() const;
};

/// Point traction acting at a fixed location.
struct PointLoad
{
    Vec2 position = Vec2::Zero();
    Vec2 force = Vec2::Zero();
};

/// Body acceleration per particle at time t.
using BodyForce = std::function<Vec2(const Particle&, double)>;

GridSystem assemble_mass(const std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                         const BasisSet& basis, std::shared_ptr<const SparsePattern> pattern, MassMode mode);

void assemble_forces(GridSystem& grid, const std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                     const BasisSet& basis, const BodyForce& body, double time,
                     const std::vector<PointLoad>& loads = {});

/// Copies of the homogeneous constraint spaces with zero-mass DOFs pinned.
std::array<ConstrainedSpace, 2> effective_spaces(const GridSystem& grid, const std::array<ConstrainedSpace, 2>& base);

/// Solves M x = rhs per component on the given spaces.
FieldCoefficients solve_mass_system(const GridSystem& grid, const FieldCoefficients& rhs,
                                    const std::array<ConstrainedSpace, 2>& spaces);

/// M a = F_trac - F_int + F_body.
FieldCoefficients solve_acceleration(const GridSystem& grid, const std::array<ConstrainedSpace, 2>& spaces);

/// v_p += dt sum_j a_j phi_j(x_p).
void update_particle_velocities(std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                                const FieldCoefficients& acceleration, double dt);

/// P_i = sum_p m_p v_p phi_i(x_p).
FieldCoefficients assemble_momentum(const std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                                    int size);

/// Density-weighted L2 projection of the particle velocities: M v = P.
FieldCoefficients project_velocity_field(const GridSystem& grid, const std::vector<Particle>& particles,
                                         const std::vector<BasisEval>& evals,
                                         const std::array<ConstrainedSpace, 2>& spaces);

/// Symmetric velocity gradient, D <- (I + dt eps) D and stress. Throws
/// NonPositiveJacobian when det D <= 0.
void update_deformation_and_stress(std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                                   const FieldCoefficients& velocity, double dt, const MaterialModel& material);

enum class LeavePolicy { Abort, Clamp };

/// V = J V0, rho = m / V, then x and u advance with the grid velocity.
/// Particles that leave the mesh throw ParticleLeftDomain or, with Clamp,
/// are moved back onto the closest boundary point.
void update_volume_density_positions(std::vector<Particle>& particles, const BasisSet& basis,
                                     const std::vector<BasisEval>& evals, const FieldCoefficients& velocity, double dt,
                                     LeavePolicy policy = LeavePolicy::Abort);

// ---------------------------------------------------------------------------
// Boundary conditions on rectangular domains

enum class SideCondition { Free, Roller, Fixed };

std::string to_string(SideCondition side);
SideCondition side_condition_from_string(const std::string& name);

/// Roller fixes the normal component only; Fixed fixes both.
struct BoxBoundary
{
    SideCondition left = SideCondition::Free;
    SideCondition right = SideCondition::Free;
    SideCondition bottom = SideCondition::Free;
    SideCondition top = SideCondition::Free;

    bool operator==(const BoxBoundary&) const = default;
};

/// Homogeneous Dirichlet data for every mesh vertex on a constrained side.
std::vector<DirichletConstraint> box_constraints(const Triangulation& mesh, const Rect& box,
                                                 const BoxBoundary& sides);

/// Homogeneous constraint spaces of both components.
std::array<ConstrainedSpace, 2> homogeneous_spaces(const BasisSet& basis,
                                                   const std::vector<DirichletConstraint>& dirichlet);

// ---------------------------------------------------------------------------
// Time stepping

struct StepOptions
{
    double dt = 1e-3;
    MassMode mass_mode = MassMode::Consistent;
    MaterialModel material;
    BodyForce body_force;
    std::vector<PointLoad> loads;
    std::vector<DirichletConstraint> dirichlet;
    LeavePolicy leave_policy = LeavePolicy::Abort;
};

/// Explicit Euler-Cromer MPM. Grid quantities live for one step only.
class Simulation
{
  public:
    Simulation(std::shared_ptr<const BasisSet> basis, std::vector<Particle> particles, StepOptions options);

    void step();
    void run_until(double t_end);

    double time() const { return time_; }
    long steps() const { return steps_; }
    const StepOptions& options() const { return options_; }
    const BasisSet& basis() const { return *basis_; }
    const std::vector<Particle>& particles() const { return particles_; }
    std::vector<Particle>& particles() { return particles_; }
    /// Grid of the last completed step.
    const GridSystem& grid() const { return grid_; }
    const FieldCoefficients& grid_velocity() const { return velocity_; }

  private:
    std::shared_ptr<const BasisSet> basis_;
    std::shared_ptr<const SparsePattern> pattern_;
    std::vector<Particle> particles_;
    StepOptions options_;
    std::array<ConstrainedSpace, 2> spaces_;
    GridSystem grid_;
    FieldCoefficients velocity_;
    double time_ = 0.0;
    long steps_ = 0;
};

} // namespace psmpm
