#pragma once

#include <Eigen/Dense>

#include <array>

namespace psmpm {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec3 = Eigen::Vector3d;

using TriangleVertices = std::array<Vec2, 3>;

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
inline double cross(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

inline double signed_area(const TriangleVertices& t) { return 0.5 * cross(t[0], t[1], t[2]); }

/// Squared diagonal of the bounding box of the three vertices.
double bbox_scale_squared(const TriangleVertices& t);

/// Barycentric coordinates of p; throws DegenerateTriangle when
/// |area| < 1e-14 * bbox_scale_squared.
Vec3 barycentric_coordinates(const TriangleVertices& t, const Vec2& p);

/// Point equidistant from the three edge lines.
Vec2 incenter(const TriangleVertices& t);

/// Affine map from Cartesian coordinates to barycentric coordinates of a
/// fixed triangle. The gradient of eta_m is column m of `grad`.
struct BarycentricMap
{
    Eigen::Matrix<double, 2, 3> grad;
    Vec3 offset;

    static BarycentricMap of(const TriangleVertices& t);

    Vec3 operator()(const Vec2& p) const { return offset + grad.transpose() * p; }
};

} // namespace psmpm
