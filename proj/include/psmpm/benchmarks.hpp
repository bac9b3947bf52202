#pragma once

#include "psmpm/mpm.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace psmpm {

// ---------------------------------------------------------------------------
// Manufactured vibrating plate

struct MmsParameters
{
    double density = 1e3;
    double amplitude = 0.05;
    double youngs_modulus = 1e7;
    double poisson_ratio = 0.3;

    double wave_speed() const;
    /// Angular frequency sqrt(E / rho) pi.
    double omega() const;
    double period() const;
    MaterialModel material() const { return {MaterialKind::NeoHookean, youngs_modulus, poisson_ratio}; }
};

struct MmsState
{
    Vec2 u = Vec2::Zero();
    double dxx = 1.0;
    double dyy = 1.0;
};

/// Exact displacement and deformation gradient at reference point (x0, y0).
MmsState mms_exact(double x0, double y0, double t, const MmsParameters& p = {});
/// Time derivative of the exact displacement.
Vec2 mms_velocity(double x0, double y0, double t, const MmsParameters& p = {});
/// Body acceleration that makes the exact field satisfy the momentum balance.
Vec2 mms_body_force(double x0, double y0, double t, const MmsParameters& p = {});

// ---------------------------------------------------------------------------
// Benchmark descriptions

enum class BodyForceKind { None, Gravity, Mms };
enum class InitialVelocity { Rest, Mms, BarMode };
enum class ParticleLayoutKind { Lattice, PerElement };

std::string to_string(BodyForceKind kind);
BodyForceKind body_force_kind_from_string(const std::string& name);
std::string to_string(InitialVelocity kind);
InitialVelocity initial_velocity_from_string(const std::string& name);
std::string to_string(ParticleLayoutKind kind);
ParticleLayoutKind particle_layout_from_string(const std::string& name);

struct BenchmarkSpec
{
    std::string name = "custom";
    BasisFamily basis = BasisFamily::PowellSabin;

    MeshKind mesh_kind = MeshKind::Structured;
    /// Lattice spacing; ignored for structured meshes when cells_x, cells_y > 0.
    double h = 0.125;
    int cells_x = 0;
    int cells_y = 0;
    std::uint64_t seed = 1;
    /// Mesh read from this file instead of generated when non-empty.
    std::filesystem::path mesh_file;
    Rect mesh_domain;
    /// Region initially filled with material.
    Rect body;

    MaterialModel material;
    double density = 1.0;
    double dt = 1e-3;
    double t_end = 1.0;

    ParticleLayoutKind layout = ParticleLayoutKind::PerElement;
    int ppe = 4;
    int lattice_x = 0;
    int lattice_y = 0;

    MassMode mass_mode = MassMode::Consistent;
    BoxBoundary boundary;
    BodyForceKind body_force = BodyForceKind::None;
    Vec2 gravity = Vec2(0.0, -9.81);
    InitialVelocity initial_velocity = InitialVelocity::Rest;
    /// Peak initial velocity of the bar mode.
    double v0 = 0.0;
    LeavePolicy leave_policy = LeavePolicy::Abort;

    /// Throws ValidationError naming the offending field.
    void validate() const;
    double wave_speed() const;

    bool operator==(const BenchmarkSpec& o) const;
};

/// Mesh, basis, particles and step options ready for a Simulation.
struct BenchmarkSetup
{
    std::shared_ptr<const Triangulation> mesh;
    std::shared_ptr<const BasisSet> basis;
    std::vector<Particle> particles;
    StepOptions options;
    /// Mean edge length of the mesh (hats) or of the PS refinement.
    double h_measured = 0.0;
};

std::shared_ptr<const Triangulation> build_mesh(const BenchmarkSpec& spec);
std::shared_ptr<const BasisSet> build_basis(BasisFamily family, std::shared_ptr<const Triangulation> mesh);
/// Mean edge length for hats, mean sub-triangle edge length for PS splines.
double characteristic_length(const BasisSet& basis);
BenchmarkSetup build_benchmark(const BenchmarkSpec& spec);
/// dt sqrt(E / rho) / h with the characteristic length of the basis.
double courant_number(const BenchmarkSpec& spec, double h_measured);

/// Manufactured vibrating plate on a jittered unit-square mesh. A lattice
/// layout places round(sqrt(ppe * elements)) particles per direction.
/// dt holds the given Courant number and divides one period evenly.
BenchmarkSpec mms_spec(BasisFamily basis, double h, int ppe, double courant = 0.2, std::uint64_t seed = 1,
                       ParticleLayoutKind layout = ParticleLayoutKind::Lattice);
/// Thin bar fixed at both ends, set in motion by its first mode.
BenchmarkSpec vibrating_bar_spec();
/// Column under self-weight on a 1 x rows block grid plus one empty row.
BenchmarkSpec soil_column_spec(MassMode mode, int rows = 8);

/// dt rounded down so that it divides `period` into whole steps.
double fit_dt_to_period(double dt, double period);

// ---------------------------------------------------------------------------
// Errors and studies

/// [time][particle] positions.
using Trajectories = std::vector<std::vector<Vec2>>;

/// sqrt(sum_i sum_p |x - x_exact|^2 / (n_p n_t)). Throws MismatchedSeries.
double rms_error(const Trajectories& simulated, const Trajectories& exact);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MmsRun
{
    double rms_error = 0.0;
    double dt = 0.0;
    double h_measured = 0.0;
    long steps = 0;
    std::size_t particles = 0;
    int functions = 0;
};

using StepObserver = std::function<void(const Simulation&)>;

/// Runs one period of the plate and accumulates the RMS position error
/// against the exact trajectories at every step.
MmsRun run_mms(const BenchmarkSpec& spec, const StepObserver& observer = {});

struct ErrorRow
{
    std::string benchmark;
    BasisFamily basis = BasisFamily::PowellSabin;
    double h = 0.0;
    double h_nominal = 0.0;
    int ppe = 0;
    double dt = 0.0;
    std::size_t particles = 0;
    double rms_error = 0.0;
};

struct ErrorReport
{
    std::vector<ErrorRow> rows;
    /// Slope of log RMS against log h at the largest ppe.
    double slope = 0.0;
    /// (nominal h, slope of log RMS against log sqrt(ppe)) for each h with at least two ppe values.
    std::vector<std::pair<double, double>> particle_slopes;
};

struct ConvergenceOptions
{
    double courant = 0.2;
    std::uint64_t seed = 1;
    ParticleLayoutKind layout = ParticleLayoutKind::Lattice;
    /// Worker count; 0 reads PSMPM_THREADS (default 1).
    int threads = 0;
    /// Replaces run_mms, e.g. for pipeline checks.
    std::function<MmsRun(const BenchmarkSpec&)> runner;
};

ErrorReport convergence_study(BasisFamily basis, const std::vector<double>& h_list, const std::vector<int>& ppe_list,
                              const ConvergenceOptions& options = {});

/// CSV with columns benchmark,basis,h,ppe,dt,rms_error,slope. The slope
/// column is filled on the rows it was fitted from.
void write_error_report(const ErrorReport& report, std::ostream& out);
void write_error_report(const ErrorReport& report, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Diagnostics

/// Kinetic plus stored elastic energy of the particles.
double total_energy(const std::vector<Particle>& particles, const MaterialModel& material);

/// Small-strain modal amplitude v0 L / (pi c) and period 2 L / c of the bar.
double bar_amplitude(const BenchmarkSpec& bar);
double bar_period(const BenchmarkSpec& bar);

/// Static vertical stress at reference height y0: rho g (H - y0).
double soil_static_stress(const BenchmarkSpec& column, double y0);
/// RMS difference between particle sigma_yy and the static profile.
double soil_profile_deviation(const std::vector<Particle>& particles, const BenchmarkSpec& column);
/// Mean sigma_yy over particles whose reference height lies in the lower
/// half of the bottom element row.
double soil_bottom_stress(const std::vector<Particle>& particles, const BenchmarkSpec& column);

/// Index of the particle whose reference position is nearest to `target`.
std::size_t nearest_particle(const std::vector<Particle>& particles, const Vec2& target);

struct Oscillation
{
    double amplitude = 0.0;
    /// Twice the mean spacing of zero crossings; 0 with fewer than two.
    double period = 0.0;
};

/// Peak |value| and period of a sampled signal from linearly interpolated
/// zero crossings.
Oscillation measure_oscillation(const std::vector<double>& times, const std::vector<double>& values);

/// Mean sigma(row, col) of the particles in each of `bins` equal bins of
/// current x over [lo, hi). Empty bins hold NaN.
std::vector<double> binned_stress(const std::vector<Particle>& particles, int row, int col, double lo, double hi,
                                  int bins);

/// Interior bins where the profile turns while both adjacent differences
/// exceed rel_tol * max |profile|.
int count_sign_alternations(const std::vector<double>& profile, double rel_tol);

struct TracedRun
{
    MmsRun run;
    std::size_t particle = 0;
    Vec2 x0 = Vec2::Zero();
    /// Largest |sigma_xx(t + dt) - sigma_xx(t)| of the traced particle.
    double max_stress_jump = 0.0;
    /// RMS position error of the traced particle over all steps.
    double rms_error = 0.0;
};

/// Plate run that traces the particle starting nearest to `target`.
TracedRun trace_mms_particle(const BenchmarkSpec& spec, const Vec2& target);

} // namespace psmpm
