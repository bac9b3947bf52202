#include "psmpm/output.hpp"

#include "psmpm/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace psmpm {

namespace {

const char* const kHeader = "id,x,y,ux,uy,vx,vy,sxx,syy,sxy,V,rho";

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw IOError("cannot write " + path.string());
    return out;
}

void finish(std::ostream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw IOError("failed writing " + path.string());
}

double parse_double(const std::string& s, int line)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(line, "expected a number, got '" + s + "'");
    return v;
}

} // namespace

bool ParticleRecord::operator==(const ParticleRecord& o) const
{
    return id == o.id && x == o.x && u == o.u && v == o.v && sxx == o.sxx && syy == o.syy && sxy == o.sxy &&
           volume == o.volume && density == o.density;
}

ParticleRecord make_record(long id, const Particle& p)
{
    return {id, p.x, p.u, p.v, p.sigma(0, 0), p.sigma(1, 1), p.sigma(0, 1), p.volume, p.density};
}

void write_particle_csv(const OutputFrame& frame, std::ostream& out)
{
    out << kHeader << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < frame.particles.size(); ++i) {
        const ParticleRecord r = make_record(static_cast<long>(i), frame.particles[i]);
        out << r.id << ',' << r.x.x() << ',' << r.x.y() << ',' << r.u.x() << ',' << r.u.y() << ',' << r.v.x() << ','
            << r.v.y() << ',' << r.sxx << ',' << r.syy << ',' << r.sxy << ',' << r.volume << ',' << r.density << '\n';
    }
}

void write_particle_csv(const OutputFrame& frame, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_particle_csv(frame, out);
    finish(out, path);
}

std::vector<ParticleRecord> read_particle_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw ParseError(1, "expected header '" + std::string(kHeader) + "'");
    std::vector<ParticleRecord> out;
    for (int n = 2; std::getline(in, line); ++n) {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            cells.push_back(cell);
        if (cells.size() != 12)
            throw ParseError(n, "expected 12 columns, got " + std::to_string(cells.size()));
        double v[12];
        for (int k = 1; k < 12; ++k)
            v[k] = parse_double(cells[k], n);
        long id = 0;
        const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
        if (ec != std::errc() || ptr != cells[0].data() + cells[0].size())
            throw ParseError(n, "expected an integer id, got '" + cells[0] + "'");
        out.push_back({id, Vec2(v[1], v[2]), Vec2(v[3], v[4]), Vec2(v[5], v[6]), v[7], v[8], v[9], v[10], v[11]});
    }
    return out;
}

std::vector<ParticleRecord> read_particle_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IOError("cannot read " + path.string());
    return read_particle_csv(in);
}

void write_vtk(const OutputFrame& frame, std::ostream& out)
{
    const std::size_t n = frame.particles.size();
    out << std::setprecision(17);
    out << "# vtk DataFile Version 3.0\n";
    out << "psmpm particles step " << frame.step << " time " << frame.time << '\n';
    out << "ASCII\nDATASET POLYDATA\n";
    out << "POINTS " << n << " double\n";
    for (const auto& p : frame.particles)
        out << p.x.x() << ' ' << p.x.y() << " 0\n";
    out << "VERTICES " << n << ' ' << 2 * n << '\n';
    for (std::size_t i = 0; i < n; ++i)
        out << "1 " << i << '\n';
    out << "POINT_DATA " << n << '\n';
    out << "SCALARS id int 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i)
        out << i << '\n';
    const std::pair<const char*, std::function<double(const Particle&)>> scalars[] = {
        {"ux", [](const Particle& p) { return p.u.x(); }},
        {"uy", [](const Particle& p) { return p.u.y(); }},
        {"vx", [](const Particle& p) { return p.v.x(); }},
        {"vy", [](const Particle& p) { return p.v.y(); }},
        {"sxx", [](const Particle& p) { return p.sigma(0, 0); }},
        {"syy", [](const Particle& p) { return p.sigma(1, 1); }},
        {"sxy", [](const Particle& p) { return p.sigma(0, 1); }},
        {"V", [](const Particle& p) { return p.volume; }},
        {"rho", [](const Particle& p) { return p.density; }},
    };
    for (const auto& [name, get] : scalars) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (const auto& p : frame.particles)
            out << get(p) << '\n';
    }
}

void write_vtk(const OutputFrame& frame, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_vtk(frame, out);
    finish(out, path);
}

} // namespace psmpm
