#include "psmpm/benchmarks.hpp"

#include "psmpm/error.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace psmpm {

// ---------------------------------------------------------------------------
// Manufactured solution

double MmsParameters::wave_speed() const { return std::sqrt(youngs_modulus / density); }
double MmsParameters::omega() const { return wave_speed() * M_PI; }
double MmsParameters::period() const { return 2.0 * M_PI / omega(); }

MmsState mms_exact(double x0, double y0, double t, const MmsParameters& p)
{
    const double w = p.omega();
    const double sx = std::sin(w * t), sy = std::sin(w * t + M_PI);
    MmsState s;
    s.u = Vec2(p.amplitude * std::sin(2.0 * M_PI * x0) * sx, p.amplitude * std::sin(2.0 * M_PI * y0) * sy);
    s.dxx = 1.0 + 2.0 * M_PI * p.amplitude * std::cos(2.0 * M_PI * x0) * sx;
    s.dyy = 1.0 + 2.0 * M_PI * p.amplitude * std::cos(2.0 * M_PI * y0) * sy;
    return s;
}

Vec2 mms_velocity(double x0, double y0, double t, const MmsParameters& p)
{
    const double w = p.omega();
    return Vec2(p.amplitude * std::sin(2.0 * M_PI * x0) * w * std::cos(w * t),
                p.amplitude * std::sin(2.0 * M_PI * y0) * w * std::cos(w * t + M_PI));
}

Vec2 mms_body_force(double x0, double y0, double t, const MmsParameters& p)
{
    const MmsState s = mms_exact(x0, y0, t, p);
    const MaterialModel m = p.material();
    const double lambda = m.lambda(), mu = m.mu(), rho = p.density, e = p.youngs_modulus;
    const double lnj = std::log(s.dxx * s.dyy);
    const double pi2 = M_PI * M_PI;
    auto g = [&](double u, double d) {
        return pi2 * u * (4.0 * mu / rho - e / rho - 4.0 * (lambda * (lnj - 1.0) - mu) / (rho * d * d));
    };
    return Vec2(g(s.u.x(), s.dxx), g(s.u.y(), s.dyy));
}

// ---------------------------------------------------------------------------
// Enum names

std::string to_string(BodyForceKind kind)
{
    switch (kind) {
    case BodyForceKind::None:
        return "none";
    case BodyForceKind::Gravity:
        return "gravity";
    case BodyForceKind::Mms:
        return "mms";
    }
    return "?";
}

BodyForceKind body_force_kind_from_string(const std::string& name)
{
    if (name == "none")
        return BodyForceKind::None;
    if (name == "gravity")
        return BodyForceKind::Gravity;
    if (name == "mms")
        return BodyForceKind::Mms;
    throw ValidationError("body force must be none, gravity or mms, got '" + name + "'");
}

std::string to_string(InitialVelocity kind)
{
    switch (kind) {
    case InitialVelocity::Rest:
        return "rest";
    case InitialVelocity::Mms:
        return "mms";
    case InitialVelocity::BarMode:
        return "bar-mode";
    }
    return "?";
}

InitialVelocity initial_velocity_from_string(const std::string& name)
{
    if (name == "rest")
        return InitialVelocity::Rest;
    if (name == "mms")
        return InitialVelocity::Mms;
    if (name == "bar-mode")
        return InitialVelocity::BarMode;
    throw ValidationError("initial velocity must be rest, mms or bar-mode, got '" + name + "'");
}

std::string to_string(ParticleLayoutKind kind)
{
    return kind == ParticleLayoutKind::Lattice ? "lattice" : "per-element";
}

ParticleLayoutKind particle_layout_from_string(const std::string& name)
{
    if (name == "lattice")
        return ParticleLayoutKind::Lattice;
    if (name == "per-element")
        return ParticleLayoutKind::PerElement;
    throw ValidationError("particle layout must be lattice or per-element, got '" + name + "'");
}

// ---------------------------------------------------------------------------
// Specs

void BenchmarkSpec::validate() const
{
    material.validate();
    if (!(density > 0.0))
        throw ValidationError("material.density must be positive");
    if (!(dt > 0.0))
        throw ValidationError("run.dt must be positive");
    if (!(t_end >= 0.0))
        throw ValidationError("run.t_end must be non-negative");
    if (!(h > 0.0) && !(cells_x > 0 && cells_y > 0))
        throw ValidationError("mesh.h must be positive");
    if (!(mesh_domain.width() > 0.0 && mesh_domain.height() > 0.0))
        throw ValidationError("mesh.domain must have positive extents");
    if (!(body.width() > 0.0 && body.height() > 0.0))
        throw ValidationError("particles.region must have positive extents");
    if (layout == ParticleLayoutKind::PerElement && ppe < 1)
        throw ValidationError("particles.ppe must be positive");
    if (layout == ParticleLayoutKind::Lattice && (lattice_x < 1 || lattice_y < 1))
        throw ValidationError("particles.nx and particles.ny must be positive");
}

bool BenchmarkSpec::operator==(const BenchmarkSpec& o) const
{
    return name == o.name && basis == o.basis && mesh_kind == o.mesh_kind && h == o.h && cells_x == o.cells_x &&
           cells_y == o.cells_y && seed == o.seed && mesh_file == o.mesh_file && mesh_domain == o.mesh_domain &&
           body == o.body && material == o.material && density == o.density && dt == o.dt && t_end == o.t_end &&
           layout == o.layout && ppe == o.ppe && lattice_x == o.lattice_x && lattice_y == o.lattice_y &&
           mass_mode == o.mass_mode && boundary == o.boundary && body_force == o.body_force && gravity == o.gravity &&
           initial_velocity == o.initial_velocity && v0 == o.v0 && leave_policy == o.leave_policy;
}

double BenchmarkSpec::wave_speed() const { return std::sqrt(material.youngs_modulus / density); }

std::shared_ptr<const Triangulation> build_mesh(const BenchmarkSpec& spec)
{
    if (!spec.mesh_file.empty())
        return std::make_shared<const Triangulation>(read_mesh(spec.mesh_file));
    if (spec.mesh_kind == MeshKind::Structured && spec.cells_x > 0 && spec.cells_y > 0)
        return std::make_shared<const Triangulation>(structured_mesh(spec.mesh_domain, spec.cells_x, spec.cells_y));
    return std::make_shared<const Triangulation>(generate_mesh(spec.mesh_kind, spec.h, spec.mesh_domain, spec.seed));
}

std::shared_ptr<const BasisSet> build_basis(BasisFamily family, std::shared_ptr<const Triangulation> mesh)
{
    if (family == BasisFamily::Hat)
        return hat_basis(std::move(mesh));
    return ps_basis(std::make_shared<const PSRefinement>(ps_refine(std::move(mesh))));
}

double characteristic_length(const BasisSet& basis)
{
    if (const auto* ps = dynamic_cast<const PsBasis*>(&basis))
        return ps->refinement().mean_sub_edge_length();
    return basis.mesh().mean_edge_length();
}

double courant_number(const BenchmarkSpec& spec, double h_measured)
{
    return spec.dt * spec.wave_speed() / h_measured;
}

BenchmarkSetup build_benchmark(const BenchmarkSpec& spec)
{
    spec.validate();
    BenchmarkSetup setup;
    setup.mesh = build_mesh(spec);
    setup.basis = build_basis(spec.basis, setup.mesh);
    setup.h_measured = characteristic_length(*setup.basis);

    if (spec.layout == ParticleLayoutKind::Lattice) {
        setup.particles = lattice_particles(*setup.mesh, spec.body, spec.lattice_x, spec.lattice_y, spec.density);
    } else {
        const Triangulation& mesh = *setup.mesh;
        const double tol = 1e-9 * mesh.scale();
        setup.particles = per_element_particles(mesh, spec.ppe, spec.density, [&](int e) {
            const auto t = mesh.element_vertices(e);
            return spec.body.contains((t[0] + t[1] + t[2]) / 3.0, tol);
        });
    }

    const MmsParameters mms{spec.density, 0.05, spec.material.youngs_modulus, spec.material.poisson_ratio};
    for (auto& p : setup.particles) {
        if (spec.initial_velocity == InitialVelocity::Mms)
            p.v = mms_velocity(p.x0.x(), p.x0.y(), 0.0, mms);
        else if (spec.initial_velocity == InitialVelocity::BarMode)
            p.v = Vec2(spec.v0 * std::sin(M_PI * (p.x0.x() - spec.body.lo.x()) / spec.body.width()), 0.0);
    }

    StepOptions& opt = setup.options;
    opt.dt = spec.dt;
    opt.mass_mode = spec.mass_mode;
    opt.material = spec.material;
    opt.leave_policy = spec.leave_policy;
    opt.dirichlet = box_constraints(*setup.mesh, spec.mesh_domain, spec.boundary);
    if (spec.body_force == BodyForceKind::Gravity) {
        const Vec2 g = spec.gravity;
        opt.body_force = [g](const Particle&, double) { return g; };
    } else if (spec.body_force == BodyForceKind::Mms) {
        opt.body_force = [mms](const Particle& p, double t) { return mms_body_force(p.x0.x(), p.x0.y(), t, mms); };
    }
    return setup;
}

double fit_dt_to_period(double dt, double period)
{
    const double steps = std::ceil(period / dt - 1e-9);
    return period / steps;
}

BenchmarkSpec mms_spec(BasisFamily basis, double h, int ppe, double courant, std::uint64_t seed,
                       ParticleLayoutKind layout)
{
    const MmsParameters p;
    BenchmarkSpec s;
    s.name = "mms";
    s.basis = basis;
    s.mesh_kind = MeshKind::Jittered;
    s.h = h;
    s.seed = seed;
    s.mesh_domain = s.body = Rect{Vec2(0, 0), Vec2(1, 1)};
    s.material = p.material();
    s.density = p.density;
    s.t_end = p.period();
    s.layout = layout;
    s.ppe = ppe;
    s.mass_mode = MassMode::Consistent;
    s.boundary = BoxBoundary{SideCondition::Roller, SideCondition::Roller, SideCondition::Roller, SideCondition::Roller};
    s.body_force = BodyForceKind::Mms;
    s.initial_velocity = InitialVelocity::Mms;
    const auto mesh = build_mesh(s);
    if (layout == ParticleLayoutKind::Lattice) {
        // same particle count as ppe per element, spread uniformly
        const int n = static_cast<int>(std::lround(std::sqrt(double(ppe) * mesh->num_elements())));
        s.lattice_x = s.lattice_y = n;
    }
    const double hm = characteristic_length(*build_basis(basis, mesh));
    s.dt = fit_dt_to_period(courant * hm / p.wave_speed(), p.period());
    return s;
}

BenchmarkSpec vibrating_bar_spec()
{
    BenchmarkSpec s;
    s.name = "bar";
    s.basis = BasisFamily::PowellSabin;
    s.mesh_kind = MeshKind::Structured;
    s.h = 1.0 / 16.0;
    s.mesh_domain = s.body = Rect{Vec2(0, 0), Vec2(1, 2)};
    s.material = MaterialModel{MaterialKind::LinearElastic, 50.0, 0.0};
    s.density = 25.0;
    s.dt = 5e-3;
    s.t_end = 2.5;
    s.layout = ParticleLayoutKind::PerElement;
    s.ppe = 16;
    s.mass_mode = MassMode::Consistent;
    s.boundary = BoxBoundary{SideCondition::Fixed, SideCondition::Fixed, SideCondition::Roller, SideCondition::Roller};
    s.initial_velocity = InitialVelocity::BarMode;
    s.v0 = 0.1;
    return s;
}

BenchmarkSpec soil_column_spec(MassMode mode, int rows)
{
    if (rows < 1)
        throw ValidationError("soil column needs at least one row");
    BenchmarkSpec s;
    s.name = "soil";
    s.basis = BasisFamily::PowellSabin;
    s.mesh_kind = MeshKind::Structured;
    const double height = 1.0, width = 0.1;
    s.cells_x = 1;
    s.cells_y = rows + 1;
    s.h = height / rows;
    s.body = Rect{Vec2(0, 0), Vec2(width, height)};
    s.mesh_domain = Rect{Vec2(0, 0), Vec2(width, height + height / rows)};
    s.material = MaterialModel{MaterialKind::LinearElastic, 1e5, 0.0};
    s.density = 1e3;
    s.dt = 1e-3;
    s.t_end = 2.5;
    s.layout = ParticleLayoutKind::PerElement;
    s.ppe = 16;
    s.mass_mode = mode;
    s.boundary = BoxBoundary{SideCondition::Roller, SideCondition::Roller, SideCondition::Fixed, SideCondition::Free};
    s.body_force = BodyForceKind::Gravity;
    s.gravity = Vec2(0.0, -9.81);
    return s;
}

// ---------------------------------------------------------------------------
// Errors and studies

double rms_error(const Trajectories& simulated, const Trajectories& exact)
{
    if (simulated.size() != exact.size())
        throw MismatchedSeries("time series lengths differ");
    if (simulated.empty())
        throw MismatchedSeries("empty time series");
    double sum = 0.0;
    std::size_t n = 0;
    const std::size_t np = simulated.front().size();
    for (std::size_t i = 0; i < simulated.size(); ++i) {
        if (simulated[i].size() != exact[i].size() || simulated[i].size() != np)
            throw MismatchedSeries("particle counts differ at sample " + std::to_string(i));
        for (std::size_t p = 0; p < np; ++p)
            sum += (simulated[i][p] - exact[i][p]).squaredNorm();
        n += np;
    }
    if (n == 0)
        throw MismatchedSeries("no particles");
    return std::sqrt(sum / static_cast<double>(n));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
        throw MismatchedSeries("slope fit needs equally long series");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    if (lx.size() < 2)
        return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

MmsRun run_mms(const BenchmarkSpec& spec, const StepObserver& observer)
{
    BenchmarkSetup setup = build_benchmark(spec);
    const MmsParameters mms{spec.density, 0.05, spec.material.youngs_modulus, spec.material.poisson_ratio};
    MmsRun out;
    out.dt = spec.dt;
    out.h_measured = setup.h_measured;
    out.particles = setup.particles.size();
    out.functions = setup.basis->size();

    Simulation sim(setup.basis, std::move(setup.particles), setup.options);
    double sum = 0.0;
    while (sim.time() < spec.t_end - 0.5 * spec.dt) {
        sim.step();
        for (const auto& p : sim.particles()) {
            const Vec2 exact = p.x0 + mms_exact(p.x0.x(), p.x0.y(), sim.time(), mms).u;
            sum += (p.x - exact).squaredNorm();
        }
        if (observer)
            observer(sim);
    }
    out.steps = sim.steps();
    const double samples = static_cast<double>(out.steps) * static_cast<double>(out.particles);
    out.rms_error = samples > 0 ? std::sqrt(sum / samples) : 0.0;
    return out;
}

namespace {

int worker_count(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("PSMPM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return 1;
}

std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

ErrorReport convergence_study(BasisFamily basis, const std::vector<double>& h_list, const std::vector<int>& ppe_list,
                              const ConvergenceOptions& options)
{
    struct Job
    {
        double h;
        int ppe;
    };
    std::vector<Job> jobs;
    for (int ppe : ppe_list)
        for (double h : h_list)
            jobs.push_back({h, ppe});

    ErrorReport report;
    report.rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                const BenchmarkSpec spec = mms_spec(basis, jobs[j].h, jobs[j].ppe, options.courant, options.seed, options.layout);
                const MmsRun run = options.runner ? options.runner(spec) : run_mms(spec);
                ErrorRow& row = report.rows[j];
                row.benchmark = spec.name;
                row.basis = basis;
                row.h = run.h_measured;
                row.h_nominal = jobs[j].h;
                row.ppe = jobs[j].ppe;
                row.dt = run.dt;
                row.particles = run.particles;
                row.rms_error = run.rms_error;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const int workers = std::min<int>(worker_count(options.threads), static_cast<int>(jobs.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    if (!ppe_list.empty()) {
        const int top = *std::max_element(ppe_list.begin(), ppe_list.end());
        std::vector<double> hs, errs;
        for (const auto& row : report.rows) {
            if (row.ppe == top) {
                hs.push_back(row.h);
                errs.push_back(row.rms_error);
            }
        }
        report.slope = loglog_slope(hs, errs);
    }
    std::vector<double> nominal;
    for (const auto& row : report.rows)
        if (std::find(nominal.begin(), nominal.end(), row.h_nominal) == nominal.end())
            nominal.push_back(row.h_nominal);
    for (double h : nominal) {
        std::vector<double> per_dim, errs;
        for (const auto& row : report.rows) {
            if (row.h_nominal == h) {
                per_dim.push_back(std::sqrt(double(row.ppe)));
                errs.push_back(row.rms_error);
            }
        }
        if (per_dim.size() >= 2)
            report.particle_slopes.push_back({h, loglog_slope(per_dim, errs)});
    }
    return report;
}

void write_error_report(const ErrorReport& report, std::ostream& out)
{
    int top = 0;
    for (const auto& row : report.rows)
        top = std::max(top, row.ppe);
    out << "benchmark,basis,h,ppe,dt,rms_error,slope\n";
    for (const auto& row : report.rows) {
        out << row.benchmark << ',' << to_string(row.basis) << ',' << format_double(row.h) << ',' << row.ppe << ','
            << format_double(row.dt) << ',' << format_double(row.rms_error) << ',';
        if (row.ppe == top)
            out << format_double(report.slope);
        out << '\n';
    }
}

void write_error_report(const ErrorReport& report, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw IOError("cannot write " + path.string());
    write_error_report(report, out);
    if (!out)
        throw IOError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Diagnostics

double total_energy(const std::vector<Particle>& particles, const MaterialModel& material)
{
    double e = 0.0;
    for (const auto& p : particles)
        e += 0.5 * p.mass * p.v.squaredNorm() + p.volume * material.energy_density(p.D);
    return e;
}

double bar_amplitude(const BenchmarkSpec& bar)
{
    return bar.v0 * bar.body.width() / (M_PI * bar.wave_speed());
}

double bar_period(const BenchmarkSpec& bar) { return 2.0 * bar.body.width() / bar.wave_speed(); }

double soil_static_stress(const BenchmarkSpec& column, double y0)
{
    return column.density * column.gravity.y() * (column.body.hi.y() - y0);
}

double soil_profile_deviation(const std::vector<Particle>& particles, const BenchmarkSpec& column)
{
    if (particles.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto& p : particles) {
        const double d = p.sigma(1, 1) - soil_static_stress(column, p.x0.y());
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(particles.size()));
}

double soil_bottom_stress(const std::vector<Particle>& particles, const BenchmarkSpec& column)
{
    const double limit = column.body.lo.y() + 0.5 * column.body.height() / (column.cells_y - 1);
    double sum = 0.0;
    int count = 0;
    for (const auto& p : particles) {
        if (p.x0.y() < limit) {
            sum += p.sigma(1, 1);
            ++count;
        }
    }
    if (count == 0)
        throw ValidationError("no particles in the bottom layer");
    return sum / count;
}

std::size_t nearest_particle(const std::vector<Particle>& particles, const Vec2& target)
{
    if (particles.empty())
        throw ValidationError("no particles to trace");
    std::size_t best = 0;
    for (std::size_t i = 1; i < particles.size(); ++i)
        if ((particles[i].x0 - target).squaredNorm() < (particles[best].x0 - target).squaredNorm())
            best = i;
    return best;
}

Oscillation measure_oscillation(const std::vector<double>& times, const std::vector<double>& values)
{
    if (times.size() != values.size())
        throw MismatchedSeries("times and values differ in length");
    Oscillation out;
    std::vector<double> crossings;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.amplitude = std::max(out.amplitude, std::abs(values[i]));
        if (i > 0 && values[i - 1] * values[i] < 0.0) {
            const double w = values[i - 1] / (values[i - 1] - values[i]);
            crossings.push_back(times[i - 1] + w * (times[i] - times[i - 1]));
        }
    }
    if (crossings.size() >= 2)
        out.period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    return out;
}

std::vector<double> binned_stress(const std::vector<Particle>& particles, int row, int col, double lo, double hi,
                                  int bins)
{
    if (bins < 1 || !(hi > lo))
        throw ValidationError("binned_stress needs bins >= 1 and hi > lo");
    std::vector<double> sum(bins, 0.0);
    std::vector<int> count(bins, 0);
    for (const auto& p : particles) {
        const int b = static_cast<int>(std::floor((p.x.x() - lo) / (hi - lo) * bins));
        if (b < 0 || b >= bins)
            continue;
        sum[b] += p.sigma(row, col);
        ++count[b];
    }
    for (int b = 0; b < bins; ++b)
        sum[b] = count[b] > 0 ? sum[b] / count[b] : std::numeric_limits<double>::quiet_NaN();
    return sum;
}

int count_sign_alternations(const std::vector<double>& profile, double rel_tol)
{
    double scale = 0.0;
    for (double v : profile)
        scale = std::max(scale, std::abs(v));
    const double tol = rel_tol * scale;
    int count = 0;
    for (std::size_t k = 1; k + 1 < profile.size(); ++k) {
        const double a = profile[k] - profile[k - 1];
        const double b = profile[k + 1] - profile[k];
        if (a * b < 0.0 && std::abs(a) > tol && std::abs(b) > tol)
            ++count;
    }
    return count;
}

TracedRun trace_mms_particle(const BenchmarkSpec& spec, const Vec2& target)
{
    const MmsParameters mms{spec.density, 0.05, spec.material.youngs_modulus, spec.material.poisson_ratio};
    TracedRun out;
    bool first = true;
    double previous = 0.0, sum = 0.0;
    long samples = 0;
    out.run = run_mms(spec, [&](const Simulation& sim) {
        if (first) {
            out.particle = nearest_particle(sim.particles(), target);
            out.x0 = sim.particles()[out.particle].x0;
            first = false;
        }
        const Particle& p = sim.particles()[out.particle];
        out.max_stress_jump = std::max(out.max_stress_jump, std::abs(p.sigma(0, 0) - previous));
        previous = p.sigma(0, 0);
        sum += (p.x - p.x0 - mms_exact(p.x0.x(), p.x0.y(), sim.time(), mms).u).squaredNorm();
        ++samples;
    });
    out.rms_error = samples > 0 ? std::sqrt(sum / static_cast<double>(samples)) : 0.0;
    return out;
}

} // namespace psmpm
