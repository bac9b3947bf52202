#pragma once

#include "psmpm/particles.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace psmpm {

struct OutputFrame
{
    long step = 0;
    double time = 0.0;
    std::vector<Particle> particles;
};

/// One CSV row: id,x,y,ux,uy,vx,vy,sxx,syy,sxy,V,rho.
struct ParticleRecord
{
    long id = 0;
    Vec2 x = Vec2::Zero();
    Vec2 u = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    double volume = 0.0;
    double density = 0.0;

    bool operator==(const ParticleRecord& o) const;
};

ParticleRecord make_record(long id, const Particle& p);

/// Floats are written with 17 significant digits. Throws IOError.
void write_particle_csv(const OutputFrame& frame, std::ostream& out);
void write_particle_csv(const OutputFrame& frame, const std::filesystem::path& path);

/// Throws ParseError on malformed rows and IOError if unreadable.
std::vector<ParticleRecord> read_particle_csv(std::istream& in);
std::vector<ParticleRecord> read_particle_csv(const std::filesystem::path& path);

/// Legacy ASCII POLYDATA with one vertex per particle and the CSV
/// quantities as point-data scalars. Throws IOError.
void write_vtk(const OutputFrame& frame, std::ostream& out);
void write_vtk(const OutputFrame& frame, const std::filesystem::path& path);

} // namespace psmpm
