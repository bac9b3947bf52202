#include "psmpm/particles.hpp"

#include "psmpm/error.hpp"

#include <cmath>
#include <string>

namespace psmpm {

namespace {

Particle make_particle(const Vec2& x, double volume, double density)
{
    Particle p;
    p.x = p.x0 = x;
    p.volume = p.volume0 = volume;
    p.density = density;
    p.mass = volume * density;
    return p;
}

int integer_sqrt(int n)
{
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    return k * k == n ? k : -1;
}

} // namespace

std::vector<Particle> lattice_particles(const Triangulation& mesh, const Rect& region, int nx, int ny,
                                        double density)
{
    if (nx < 1 || ny < 1)
        throw ValidationError("particle lattice needs at least one particle per direction");
    if (!(density > 0.0))
        throw ValidationError("density must be positive");
    const double dx = region.width() / nx, dy = region.height() / ny;
    std::vector<Particle> out;
    out.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 x(region.lo.x() + (i + 0.5) * dx, region.lo.y() + (j + 0.5) * dy);
            if (!mesh.locate(x))
                throw ParticleOutsideMesh("lattice particle (" + std::to_string(x.x()) + ", " +
                                          std::to_string(x.y()) + ") is not inside the mesh");
            out.push_back(make_particle(x, dx * dy, density));
        }
    }
    return out;
}

std::vector<Vec3> per_element_layout(int ppe)
{
    int k = integer_sqrt(ppe);
    bool three_point = false;
    if (k < 0 && ppe % 3 == 0) {
        k = integer_sqrt(ppe / 3);
        three_point = true;
    }
    if (k < 1)
        throw ValidationError("particles per element must be k^2 or 3 k^2, got " + std::to_string(ppe));

    std::vector<Vec3> cells;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; i + j < k; ++j) {
            cells.emplace_back((i + 1.0 / 3.0) / k, (j + 1.0 / 3.0) / k, 0.0);
            if (i + j < k - 1)
                cells.emplace_back((i + 2.0 / 3.0) / k, (j + 2.0 / 3.0) / k, 0.0);
        }
    }
    for (auto& c : cells)
        c[2] = 1.0 - c[0] - c[1];
    if (!three_point)
        return cells;

    // each small triangle has edge length 1/k in barycentric units; its
    // vertices are centroid + offsets, so the quadrature points are too
    std::vector<Vec3> out;
    out.reserve(3 * cells.size());
    for (int i = 0; i < k; ++i) {
        for (int j = 0; i + j < k; ++j) {
            const Vec3 a(double(i) / k, double(j) / k, 0.0);
            const Vec3 up[3] = {a, a + Vec3(1.0 / k, 0, 0), a + Vec3(0, 1.0 / k, 0)};
            for (int q = 0; q < 3; ++q) {
                Vec3 p = (2.0 / 3.0) * up[q] + (1.0 / 6.0) * up[(q + 1) % 3] + (1.0 / 6.0) * up[(q + 2) % 3];
                p[2] = 1.0 - p[0] - p[1];
                out.push_back(p);
            }
            if (i + j < k - 1) {
                const Vec3 b(double(i + 1) / k, double(j + 1) / k, 0.0);
                const Vec3 down[3] = {b, b - Vec3(1.0 / k, 0, 0), b - Vec3(0, 1.0 / k, 0)};
                for (int q = 0; q < 3; ++q) {
                    Vec3 p = (2.0 / 3.0) * down[q] + (1.0 / 6.0) * down[(q + 1) % 3] + (1.0 / 6.0) * down[(q + 2) % 3];
                    p[2] = 1.0 - p[0] - p[1];
                    out.push_back(p);
                }
            }
        }
    }
    return out;
}

std::vector<Particle> per_element_particles(const Triangulation& mesh, int ppe, double density,
                                            const std::function<bool(int)>& include_element)
{
    if (!(density > 0.0))
        throw ValidationError("density must be positive");
    const auto layout = per_element_layout(ppe);
    std::vector<Particle> out;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        if (include_element && !include_element(e))
            continue;
        const auto t = mesh.element_vertices(e);
        const double volume = mesh.element_area(e) / ppe;
        for (const Vec3& b : layout)
            out.push_back(make_particle(b[0] * t[0] + b[1] * t[1] + b[2] * t[2], volume, density));
    }
    return out;
}

double total_mass(const std::vector<Particle>& particles)
{
    double m = 0.0;
    for (const auto& p : particles)
        m += p.mass;
    return m;
}

} // namespace psmpm
