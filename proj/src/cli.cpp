#include "psmpm/cli.hpp"

#include "psmpm/basis_check.hpp"
#include "psmpm/config.hpp"
#include "psmpm/error.hpp"
#include "psmpm/output.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace psmpm {

namespace {

struct Overrides
{
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::string mass_mode;
    std::string basis;
    bool quiet = false;
};

RunConfig configure(const std::string& path, const Overrides& o, std::ostream& err)
{
    RunConfig config = load_config(path);
    if (!o.output_dir.empty())
        config.output_dir = o.output_dir;
    if (o.seed)
        config.spec.seed = *o.seed;
    if (!o.mass_mode.empty())
        config.spec.mass_mode = mass_mode_from_string(o.mass_mode);
    if (!o.basis.empty())
        config.spec.basis = basis_family_from_string(o.basis);
    config.validate();
    if (!o.quiet) {
        const double c = config_courant(config);
        if (c >= 1.0)
            err << "warning: Courant number " << c << " is not below 1; the explicit scheme may be unstable\n";
    }
    return config;
}

void make_directory(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IOError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out || !(out << text) || !out.flush())
        throw IOError("cannot write " + path.string());
}

std::string frame_name(long step)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06ld", step);
    return buf;
}

int command_run(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err)
{
    const RunConfig config = configure(path, o, err);
    const BenchmarkSpec spec = resolve_spec(config);
    BenchmarkSetup setup = build_benchmark(spec);
    make_directory(config.output_dir);
    write_text(config.output_dir / "config.ini", serialize_config(config));

    Simulation sim(setup.basis, setup.particles, setup.options);
    const double mass0 = total_mass(sim.particles());
    const double energy0 = total_energy(sim.particles(), spec.material);
    nlohmann::json frames = nlohmann::json::array();
    auto emit = [&] {
        const OutputFrame frame{sim.steps(), sim.time(), sim.particles()};
        const std::string name = frame_name(frame.step);
        write_particle_csv(frame, config.output_dir / (name + ".csv"));
        write_vtk(frame, config.output_dir / (name + ".vtk"));
        frames.push_back({{"step", frame.step}, {"time", frame.time}, {"file", name + ".csv"}});
    };

    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    int code = 0;
    emit();
    try {
        while (sim.time() < spec.t_end - 0.5 * spec.dt) {
            sim.step();
            if (sim.steps() % config.cadence == 0)
                emit();
        }
        if (sim.steps() % config.cadence != 0)
            emit();
    } catch (const IOError&) {
        throw;
    } catch (const Error& e) {
        failure = e.what();
        code = 1;
    }

    nlohmann::json summary;
    summary["benchmark"] = config.benchmark;
    summary["basis"] = to_string(spec.basis);
    summary["mass_mode"] = to_string(spec.mass_mode);
    summary["dt"] = spec.dt;
    summary["t_end"] = spec.t_end;
    summary["courant"] = courant_number(spec, setup.h_measured);
    summary["h_measured"] = setup.h_measured;
    summary["functions"] = setup.basis->size();
    summary["particles"] = sim.particles().size();
    summary["steps"] = sim.steps();
    summary["time"] = sim.time();
    summary["mass_initial"] = mass0;
    summary["mass_final"] = total_mass(sim.particles());
    summary["energy_initial"] = energy0;
    summary["energy_final"] = total_energy(sim.particles(), spec.material);
    summary["status"] = code == 0 ? "completed" : "failed";
    if (code != 0)
        summary["error"] = failure;
    summary["frames"] = frames;
    write_text(config.output_dir / "summary.json", summary.dump(2) + "\n");

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (code != 0) {
        err << "error: " << failure << " (step " << sim.steps() << ", t = " << sim.time() << " s)\n";
    } else if (!o.quiet) {
        out << "completed " << sim.steps() << " steps to t = " << sim.time() << " s with " << sim.particles().size()
            << " particles in " << std::setprecision(3) << seconds << " s; " << frames.size() << " frames in "
            << config.output_dir.string() << '\n';
    }
    return code;
}

int command_converge(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err)
{
    const RunConfig config = configure(path, o, err);
    ConvergenceOptions options;
    options.courant = config.study.courant;
    options.seed = config.spec.seed;
    options.layout = config.study.layout;
    const ErrorReport report = convergence_study(config.spec.basis, config.study.h, config.study.ppe, options);
    make_directory(config.output_dir);
    write_error_report(report, config.output_dir / "convergence.csv");

    out << std::setprecision(6);
    if (!o.quiet) {
        for (const auto& row : report.rows)
            out << to_string(row.basis) << " h=" << row.h_nominal << " (measured " << row.h << ") ppe=" << row.ppe
                << " dt=" << row.dt << " rms=" << row.rms_error << '\n';
    }
    out << "spatial slope (" << to_string(config.spec.basis) << "): " << report.slope << '\n';
    for (const auto& [h, slope] : report.particle_slopes)
        out << "particle slope at h=" << h << ": " << slope << '\n';
    return 0;
}

int command_basis_check(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err)
{
    auto mesh = std::make_shared<const Triangulation>(read_mesh(path));
    const auto basis = ps_basis(std::make_shared<const PSRefinement>(ps_refine(mesh)));
    const BasisCheckReport report = check_basis(*basis);

    const std::filesystem::path dir = o.output_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(o.output_dir);
    make_directory(dir);
    write_control_triangles_csv(*basis, dir / "control_triangles.csv");
    write_triplets_csv(*basis, dir / "triplets.csv");

    if (!o.quiet) {
        out << std::setprecision(3);
        out << "mesh: " << mesh->num_nodes() << " vertices, " << mesh->num_elements() << " elements, "
            << basis->size() << " functions\n";
        out << "partition of unity    " << report.partition_of_unity << '\n';
        out << "gradient sum (scaled) " << report.gradient_sum << '\n';
        out << "minimum value         " << report.min_value << '\n';
        out << "C1 value mismatch     " << report.edge_value_jump << '\n';
        out << "C1 gradient mismatch  " << report.edge_gradient_jump << '\n';
        out << "molecule boundary     " << report.molecule_boundary << '\n';
        out << "linear reproduction   " << report.linear_reproduction << '\n';
        out << "FD gradient mismatch  " << report.gradient_fd << '\n';
    }
    const auto violations = report.violations();
    for (const auto& v : violations)
        err << "violation: " << v << '\n';
    return violations.empty() ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Powell-Sabin and standard material point method solver"};
    app.require_subcommand(1);
    Overrides o;
    std::uint64_t seed = 0;
    app.add_option("--output-dir", o.output_dir, "Directory for output files");
    auto* seed_opt = app.add_option("--seed", seed, "Mesh generator seed");
    app.add_option("--mass-mode", o.mass_mode, "Mass matrix mode")
        ->check(CLI::IsMember({"consistent", "lumped", "partial"}));
    app.add_option("--basis", o.basis, "Basis family")->check(CLI::IsMember({"hat", "ps"}));
    app.add_flag("--quiet", o.quiet, "Only print errors and final results");

    std::string config_path, mesh_path;
    auto* run = app.add_subcommand("run", "Time-step a configuration and write frames and a summary");
    run->add_option("config", config_path, "Configuration file")->required();
    auto* converge = app.add_subcommand("converge", "Run the manufactured-solution convergence study");
    converge->add_option("config", config_path, "Configuration file")->required();
    auto* check = app.add_subcommand("basis-check", "Check Powell-Sabin basis invariants on a mesh");
    check->add_option("mesh", mesh_path, "Mesh file")->required();
    for (auto* sub : {run, converge, check})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    if (*seed_opt)
        o.seed = seed;

    try {
        if (*run)
            return command_run(config_path, o, out, err);
        if (*converge)
            return command_converge(config_path, o, out, err);
        return command_basis_check(mesh_path, o, out, err);
    } catch (const IOError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace psmpm
