#pragma once

#include "psmpm/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace psmpm {

/// Axis-aligned rectangle.
struct Rect
{
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Ones();

    double width() const { return hi.x() - lo.x(); }
    double height() const { return hi.y() - lo.y(); }
    double area() const { return width() * height(); }
    bool operator==(const Rect& o) const { return lo == o.lo && hi == o.hi; }
    bool contains(const Vec2& p, double tol = 0.0) const
    {
        return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol && p.y() <= hi.y() + tol;
    }
};

enum class MeshKind { Structured, Jittered };

std::string to_string(MeshKind kind);
MeshKind mesh_kind_from_string(const std::string& name);

/// Structured: every h-lattice cell split along its rising diagonal.
/// Jittered: interior lattice nodes moved by seeded uniform noise of
/// amplitude h/4 per coordinate, then made Delaunay by edge flips; boundary
/// nodes stay put. Throws MeshDegenerate if an element area drops below
/// 1e-3 h^2 and ValidationError if h does not divide the extents.
Triangulation generate_mesh(MeshKind kind, double h, const Rect& domain, std::uint64_t seed = 0);

/// nx x ny cells over `domain`, each split along its rising diagonal.
Triangulation structured_mesh(const Rect& domain, int nx, int ny);

/// Text format:
///
///   # comment
///   nodes
///   <index> <x> <y>
///   elements
///   <index> <n1> <n2> <n3>
Triangulation read_mesh(std::istream& in);
Triangulation read_mesh(const std::filesystem::path& path);
void write_mesh(std::ostream& out, const Triangulation& mesh);
void write_mesh(const std::filesystem::path& path, const Triangulation& mesh);

} // namespace psmpm
