#include "psmpm/mpm.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psmpm {

std::string to_string(MassMode mode)
{
    switch (mode) {
    case MassMode::Consistent:
        return "consistent";
    case MassMode::Lumped:
        return "lumped";
    case MassMode::PartialLumped:
        return "partial";
    }
    return "?";
}

MassMode mass_mode_from_string(const std::string& name)
{
    if (name == "consistent")
        return MassMode::Consistent;
    if (name == "lumped")
        return MassMode::Lumped;
    if (name == "partial" || name == "partial-lumped")
        return MassMode::PartialLumped;
    throw ValidationError("mass mode must be consistent, lumped or partial, got '" + name + "'");
}

std::vector<BasisEval> evaluate_particles(const std::vector<Particle>& particles, const BasisSet& basis)
{
    std::vector<BasisEval> out;
    out.reserve(particles.size());
    for (std::size_t p = 0; p < particles.size(); ++p) {
        auto ev = basis.try_eval(particles[p].x);
        if (!ev)
            throw ParticleOutsideMesh("particle " + std::to_string(p) + " at (" + std::to_string(particles[p].x.x()) +
                                      ", " + std::to_string(particles[p].x.y()) + ") is outside the mesh");
        out.push_back(*ev);
    }
    return out;
}

std::vector<int> GridSystem::zero_mass_dofs() const
{
    std::vector<int> out;
    const double threshold = 1e-12 * mean_particle_mass;
    for (int i = 0; i < static_cast<int>(lumped.size()); ++i)
        if (lumped[i] < threshold)
            out.push_back(i);
    return out;
}

GridSystem assemble_mass(const std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                         const BasisSet& basis, std::shared_ptr<const SparsePattern> pattern, MassMode mode)
{
    const Triangulation& mesh = basis.mesh();
    const int n = basis.size();
    GridSystem grid;
    grid.mode = mode;
    grid.mass = SparseMatrix(pattern);
    grid.particles_per_element.assign(mesh.num_elements(), 0);
    for (int c = 0; c < 2; ++c) {
        grid.f_int[c].assign(n, 0.0);
        grid.f_body[c].assign(n, 0.0);
        grid.f_trac[c].assign(n, 0.0);
    }

    auto& values = grid.mass.values();
    double total = 0.0;
    for (std::size_t p = 0; p < particles.size(); ++p) {
        const BasisEval& ev = evals[p];
        const double m = particles[p].mass;
        total += m;
        ++grid.particles_per_element[ev.element];
        for (int a = 0; a < ev.count; ++a) {
            const double ma = m * ev.value[a];
            for (int b = 0; b < ev.count; ++b)
                values[pattern->position(ev.element, a, b)] += ma * ev.value[b];
        }
    }
    grid.mean_particle_mass = particles.empty() ? 0.0 : total / static_cast<double>(particles.size());
    grid.lumped = grid.mass.row_sums();

    if (mode == MassMode::Consistent) {
        grid.lumped_rows.assign(n, 0);
        return grid;
    }
    if (mode == MassMode::Lumped) {
        grid.lumped_rows.assign(n, 1);
        std::fill(values.begin(), values.end(), 0.0);
        for (int i = 0; i < n; ++i)
            values[pattern->diagonal_position(i)] = grid.lumped[i];
        return grid;
    }

    // partial: rows whose molecule touches an empty element
    grid.lumped_rows.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int e : mesh.vertex_elements(basis.vertex_of(i))) {
            if (grid.particles_per_element[e] == 0) {
                grid.lumped_rows[i] = 1;
                break;
            }
        }
    }
    const std::vector<double> consistent = values;
    const auto& rs = pattern->row_start();
    const auto& cols = pattern->cols();
    for (int i = 0; i < n; ++i) {
        if (!grid.lumped_rows[i])
            continue;
        for (int k = rs[i]; k < rs[i + 1]; ++k) {
            const int j = cols[k];
            if (j == i) {
                values[k] = grid.lumped[i];
                continue;
            }
            values[k] = 0.0;
            values[pattern->find(j, i)] = 0.0;
            if (!grid.lumped_rows[j])
                values[pattern->diagonal_position(j)] += consistent[k];
        }
    }
    return grid;
}

void assemble_forces(GridSystem& grid, const std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                     const BasisSet& basis, const BodyForce& body, double time, const std::vector<PointLoad>& loads)
{
    for (std::size_t p = 0; p < particles.size(); ++p) {
        const Particle& part = particles[p];
        const BasisEval& ev = evals[p];
        const Vec2 g = body ? body(part, time) : Vec2::Zero();
        for (int a = 0; a < ev.count; ++a) {
            const int i = ev.index[a];
            const Vec2 f = part.volume * (part.sigma * ev.grad[a]);
            grid.f_int[0][i] += f.x();
            grid.f_int[1][i] += f.y();
            grid.f_body[0][i] += part.mass * g.x() * ev.value[a];
            grid.f_body[1][i] += part.mass * g.y() * ev.value[a];
        }
    }
    for (const auto& load : loads) {
        const BasisEval ev = basis.eval(load.position);
        for (int a = 0; a < ev.count; ++a) {
            grid.f_trac[0][ev.index[a]] += load.force.x() * ev.value[a];
            grid.f_trac[1][ev.index[a]] += load.force.y() * ev.value[a];
        }
    }
}

std::array<ConstrainedSpace, 2> effective_spaces(const GridSystem& grid, const std::array<ConstrainedSpace, 2>& base)
{
    std::array<ConstrainedSpace, 2> out = base;
    for (int i : grid.zero_mass_dofs())
        for (auto& s : out)
            s.fix_to_zero(i);
    return out;
}

FieldCoefficients solve_mass_system(const GridSystem& grid, const FieldCoefficients& rhs,
                                    const std::array<ConstrainedSpace, 2>& spaces)
{
    const int n = grid.mass.rows();
    FieldCoefficients x;
    const std::vector<double> diag = grid.mode == MassMode::Lumped ? grid.mass.diagonal() : std::vector<double>{};
    for (int c = 0; c < 2; ++c) {
        x[c].assign(n, 0.0);
        if (grid.mode == MassMode::Lumped) {
            solve_diagonal(diag, rhs[c], x[c], spaces[c]);
            continue;
        }
        // row-sum start: exact for fields the basis reproduces with equal
        // coefficients
        for (int i = 0; i < n; ++i)
            x[c][i] = grid.lumped[i] > 0.0 ? rhs[c][i] / grid.lumped[i] : 0.0;
        solve_cg(grid.mass, rhs[c], x[c], spaces[c]);
    }
    return x;
}

FieldCoefficients solve_acceleration(const GridSystem& grid, const std::array<ConstrainedSpace, 2>& spaces)
{
    FieldCoefficients rhs;
    for (int c = 0; c < 2; ++c) {
        rhs[c].resize(grid.f_int[c].size());
        for (std::size_t i = 0; i < rhs[c].size(); ++i)
            rhs[c][i] = grid.f_trac[c][i] - grid.f_int[c][i] + grid.f_body[c][i];
    }
    return solve_mass_system(grid, rhs, spaces);
}

void update_particle_velocities(std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                                const FieldCoefficients& acceleration, double dt)
{
    for (std::size_t p = 0; p < particles.size(); ++p) {
        particles[p].v.x() += dt * evals[p].interpolate(acceleration[0]);
        particles[p].v.y() += dt * evals[p].interpolate(acceleration[1]);
    }
}

FieldCoefficients assemble_momentum(const std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                                    int size)
{
    FieldCoefficients mom{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
    for (std::size_t p = 0; p < particles.size(); ++p) {
        const BasisEval& ev = evals[p];
        const Vec2 mv = particles[p].mass * particles[p].v;
        for (int a = 0; a < ev.count; ++a) {
            mom[0][ev.index[a]] += mv.x() * ev.value[a];
            mom[1][ev.index[a]] += mv.y() * ev.value[a];
        }
    }
    return mom;
}

FieldCoefficients project_velocity_field(const GridSystem& grid, const std::vector<Particle>& particles,
                                         const std::vector<BasisEval>& evals,
                                         const std::array<ConstrainedSpace, 2>& spaces)
{
    return solve_mass_system(grid, assemble_momentum(particles, evals, grid.mass.rows()), spaces);
}

void update_deformation_and_stress(std::vector<Particle>& particles, const std::vector<BasisEval>& evals,
                                   const FieldCoefficients& velocity, double dt, const MaterialModel& material)
{
    for (std::size_t p = 0; p < particles.size(); ++p) {
        Particle& part = particles[p];
        Mat2 l;
        l.row(0) = evals[p].interpolate_gradient(velocity[0]).transpose();
        l.row(1) = evals[p].interpolate_gradient(velocity[1]).transpose();
        const Mat2 eps = 0.5 * (l + l.transpose());
        part.D = (Mat2::Identity() + dt * eps) * part.D;
        const double j = part.D.determinant();
        if (!(j > 0.0))
            throw NonPositiveJacobian("particle " + std::to_string(p) + " has det D = " + std::to_string(j));
        part.sigma = material.stress(part.D);
    }
}

namespace {

/// Closest point on the mesh boundary, nudged slightly inside.
std::optional<Vec2> clamp_to_mesh(const Triangulation& mesh, const Vec2& x)
{
    double best = std::numeric_limits<double>::infinity();
    Vec2 target = x;
    Vec2 inward = Vec2::Zero();
    for (const auto& be : mesh.boundary_edges()) {
        const Vec2& a = mesh.nodes()[be.a];
        const Vec2& b = mesh.nodes()[be.b];
        const Vec2 d = b - a;
        const double t = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
        const Vec2 q = a + t * d;
        const double dist = (q - x).norm();
        if (dist < best) {
            best = dist;
            target = q;
            inward = -be.normal.normalized();
        }
    }
    for (double nudge : {1e-12, 1e-10, 1e-8}) {
        const Vec2 y = target + nudge * mesh.scale() * inward;
        if (mesh.locate(y))
            return y;
    }
    return std::nullopt;
}

} // namespace

void update_volume_density_positions(std::vector<Particle>& particles, const BasisSet& basis,
                                     const std::vector<BasisEval>& evals, const FieldCoefficients& velocity, double dt,
                                     LeavePolicy policy)
{
    const Triangulation& mesh = basis.mesh();
    for (std::size_t p = 0; p < particles.size(); ++p) {
        Particle& part = particles[p];
        part.volume = part.D.determinant() * part.volume0;
        part.density = part.mass / part.volume;
        const Vec2 v(evals[p].interpolate(velocity[0]), evals[p].interpolate(velocity[1]));
        Vec2 x = part.x + dt * v;
        if (!mesh.locate(x)) {
            std::optional<Vec2> clamped;
            if (policy == LeavePolicy::Clamp)
                clamped = clamp_to_mesh(mesh, x);
            if (!clamped)
                throw ParticleLeftDomain("particle " + std::to_string(p) + " moved to (" + std::to_string(x.x()) +
                                         ", " + std::to_string(x.y()) + ")");
            x = *clamped;
        }
        part.u += x - part.x;
        part.x = x;
    }
}

// ---------------------------------------------------------------------------

std::string to_string(SideCondition side)
{
    switch (side) {
    case SideCondition::Free:
        return "free";
    case SideCondition::Roller:
        return "roller";
    case SideCondition::Fixed:
        return "fixed";
    }
    return "?";
}

SideCondition side_condition_from_string(const std::string& name)
{
    if (name == "free")
        return SideCondition::Free;
    if (name == "roller")
        return SideCondition::Roller;
    if (name == "fixed")
        return SideCondition::Fixed;
    throw ValidationError("boundary condition must be free, roller or fixed, got '" + name + "'");
}

std::vector<DirichletConstraint> box_constraints(const Triangulation& mesh, const Rect& box, const BoxBoundary& sides)
{
    const double tol = 1e-9 * mesh.scale();
    std::vector<DirichletConstraint> out;
    auto add = [&](int v, SideCondition side, Component normal, const Vec2& tangent) {
        if (side == SideCondition::Free)
            return;
        out.push_back({v, normal, 0.0, tangent, 0.0});
        if (side == SideCondition::Fixed)
            out.push_back({v, normal == Component::X ? Component::Y : Component::X, 0.0, tangent, 0.0});
    };
    for (int v = 0; v < mesh.num_nodes(); ++v) {
        if (!mesh.is_boundary_vertex(v))
            continue;
        const Vec2& x = mesh.nodes()[v];
        if (std::abs(x.x() - box.lo.x()) < tol)
            add(v, sides.left, Component::X, Vec2(0, 1));
        if (std::abs(x.x() - box.hi.x()) < tol)
            add(v, sides.right, Component::X, Vec2(0, 1));
        if (std::abs(x.y() - box.lo.y()) < tol)
            add(v, sides.bottom, Component::Y, Vec2(1, 0));
        if (std::abs(x.y() - box.hi.y()) < tol)
            add(v, sides.top, Component::Y, Vec2(1, 0));
    }
    return out;
}

std::array<ConstrainedSpace, 2> homogeneous_spaces(const BasisSet& basis,
                                                   const std::vector<DirichletConstraint>& dirichlet)
{
    const auto rows = dirichlet_constraints(basis, dirichlet);
    std::array<ConstrainedSpace, 2> spaces{ConstrainedSpace(basis.size(), basis.functions_per_vertex()),
                                           ConstrainedSpace(basis.size(), basis.functions_per_vertex())};
    spaces[0].add_rows(rows, Component::X, true);
    spaces[1].add_rows(rows, Component::Y, true);
    return spaces;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(std::shared_ptr<const BasisSet> basis, std::vector<Particle> particles, StepOptions options)
    : basis_(std::move(basis)), particles_(std::move(particles)), options_(std::move(options))
{
    if (!(options_.dt > 0.0))
        throw ValidationError("dt must be positive");
    options_.material.validate();
    pattern_ = std::make_shared<const SparsePattern>(*basis_);
    spaces_ = homogeneous_spaces(*basis_, options_.dirichlet);
}

void Simulation::step()
{
    const double dt = options_.dt;
    const auto evals = evaluate_particles(particles_, *basis_);
    grid_ = assemble_mass(particles_, evals, *basis_, pattern_, options_.mass_mode);
    assemble_forces(grid_, particles_, evals, *basis_, options_.body_force, time_, options_.loads);
    const auto spaces = effective_spaces(grid_, spaces_);

    const auto acceleration = solve_acceleration(grid_, spaces);
    update_particle_velocities(particles_, evals, acceleration, dt);
    velocity_ = project_velocity_field(grid_, particles_, evals, spaces);
    update_deformation_and_stress(particles_, evals, velocity_, dt, options_.material);
    update_volume_density_positions(particles_, *basis_, evals, velocity_, dt, options_.leave_policy);

    ++steps_;
    time_ = static_cast<double>(steps_) * dt;
}

void Simulation::run_until(double t_end)
{
    while (time_ < t_end - 0.5 * options_.dt)
        step();
}

} // namespace psmpm
