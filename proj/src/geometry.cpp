#include "psmpm/geometry.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>

namespace psmpm {

double bbox_scale_squared(const TriangleVertices& t)
{
    const double xmin = std::min({t[0].x(), t[1].x(), t[2].x()});
    const double xmax = std::max({t[0].x(), t[1].x(), t[2].x()});
    const double ymin = std::min({t[0].y(), t[1].y(), t[2].y()});
    const double ymax = std::max({t[0].y(), t[1].y(), t[2].y()});
    return (xmax - xmin) * (xmax - xmin) + (ymax - ymin) * (ymax - ymin);
}

namespace {

void require_nondegenerate(const TriangleVertices& t)
{
    const double area = signed_area(t);
    if (!(std::abs(area) >= 1e-14 * bbox_scale_squared(t)) || area == 0.0)
        throw DegenerateTriangle("triangle area " + std::to_string(area) + " below tolerance");
}

} // namespace

BarycentricMap BarycentricMap::of(const TriangleVertices& t)
{
    require_nondegenerate(t);
    // eta_m(p) = cross(p, v_{m+1}, v_{m+2}) / cross(v_0, v_1, v_2)
    const double inv = 1.0 / cross(t[0], t[1], t[2]);
    BarycentricMap map;
    for (int m = 0; m < 3; ++m) {
        const Vec2& b = t[(m + 1) % 3];
        const Vec2& c = t[(m + 2) % 3];
        map.grad(0, m) = (b.y() - c.y()) * inv;
        map.grad(1, m) = (c.x() - b.x()) * inv;
        map.offset[m] = (b.x() * c.y() - c.x() * b.y()) * inv;
    }
    return map;
}

Vec3 barycentric_coordinates(const TriangleVertices& t, const Vec2& p)
{
    require_nondegenerate(t);
    const double inv = 1.0 / cross(t[0], t[1], t[2]);
    Vec3 eta;
    eta[1] = cross(t[0], p, t[2]) * inv;
    eta[2] = cross(t[0], t[1], p) * inv;
    eta[0] = 1.0 - eta[1] - eta[2];
    return eta;
}

Vec2 incenter(const TriangleVertices& t)
{
    require_nondegenerate(t);
    // Intersection of the interior angle bisectors at t[0] and t[1].
    const Vec2 d0 = (t[1] - t[0]).normalized() + (t[2] - t[0]).normalized();
    const Vec2 d1 = (t[0] - t[1]).normalized() + (t[2] - t[1]).normalized();
    Mat2 a;
    a << d0.x(), -d1.x(), d0.y(), -d1.y();
    const Eigen::Vector2d s = a.partialPivLu().solve(t[1] - t[0]);
    return t[0] + s[0] * d0;
}

} // namespace psmpm
