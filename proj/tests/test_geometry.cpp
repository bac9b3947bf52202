#include "psmpm/error.hpp"
#include "psmpm/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace psmpm;

TEST(Barycentric, VertexAndCentroid)
{
    const TriangleVertices t{Vec2(0.3, -0.2), Vec2(2.0, 0.1), Vec2(0.7, 1.9)};
    const Vec3 at_vertex = barycentric_coordinates(t, t[0]);
    EXPECT_NEAR(at_vertex[0], 1.0, 1e-15);
    EXPECT_NEAR(at_vertex[1], 0.0, 1e-15);
    EXPECT_NEAR(at_vertex[2], 0.0, 1e-15);

    const Vec3 at_centroid = barycentric_coordinates(t, (t[0] + t[1] + t[2]) / 3.0);
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(at_centroid[i], 1.0 / 3.0, 1e-15);
}

TEST(Barycentric, UnitRightTriangle)
{
    // x = eta2, y = eta3 on the unit right triangle
    const TriangleVertices t{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    const Vec3 eta = barycentric_coordinates(t, Vec2(0.25, 0.5));
    EXPECT_NEAR(eta[0], 0.25, 1e-15);
    EXPECT_NEAR(eta[1], 0.25, 1e-15);
    EXPECT_NEAR(eta[2], 0.5, 1e-15);
}

TEST(Barycentric, ReconstructionIsIdentity)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        TriangleVertices t{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng))};
        if (std::abs(signed_area(t)) < 1e-3)
            continue;
        const Vec2 p(u(rng), u(rng));
        const Vec3 eta = barycentric_coordinates(t, p);
        EXPECT_NEAR(eta.sum(), 1.0, 1e-12);
        const Vec2 back = eta[0] * t[0] + eta[1] * t[1] + eta[2] * t[2];
        EXPECT_NEAR((back - p).norm(), 0.0, 1e-12 * 10.0);

        const BarycentricMap map = BarycentricMap::of(t);
        EXPECT_NEAR((map(p) - eta).norm(), 0.0, 1e-12);
    }
}

TEST(Barycentric, DegenerateThrows)
{
    const TriangleVertices t{Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)};
    EXPECT_THROW(barycentric_coordinates(t, Vec2(0.5, 0.5)), DegenerateTriangle);
    EXPECT_THROW(incenter(t), DegenerateTriangle);
}

TEST(Incenter, EquilateralIsCentroid)
{
    const TriangleVertices t{Vec2(0, 0), Vec2(1, 0), Vec2(0.5, std::sqrt(3.0) / 2.0)};
    const Vec2 c = incenter(t);
    const Vec2 centroid = (t[0] + t[1] + t[2]) / 3.0;
    EXPECT_NEAR((c - centroid).norm(), 0.0, 1e-14);
}

TEST(Incenter, RightTriangleMatchesWeightedFormula)
{
    const TriangleVertices t{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    const double r = (2.0 - std::sqrt(2.0)) / 2.0;
    const Vec2 c = incenter(t);
    EXPECT_NEAR(c.x(), r, 1e-14);
    EXPECT_NEAR(c.y(), r, 1e-14);
}

namespace {

double line_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
    return std::abs(cross(a, b, p)) / (b - a).norm();
}

} // namespace

TEST(Incenter, EquidistantAndInteriorOnRandomTriangles)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        TriangleVertices t{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng))};
        if (std::abs(signed_area(t)) < 1e-2)
            continue;
        const Vec2 c = incenter(t);
        // oracle: side-length weighted vertex average
        const double a = (t[1] - t[2]).norm(), b = (t[2] - t[0]).norm(), cc = (t[0] - t[1]).norm();
        const Vec2 expected = (a * t[0] + b * t[1] + cc * t[2]) / (a + b + cc);
        EXPECT_NEAR((c - expected).norm(), 0.0, 1e-12);

        const double d0 = line_distance(c, t[0], t[1]);
        const double d1 = line_distance(c, t[1], t[2]);
        const double d2 = line_distance(c, t[2], t[0]);
        EXPECT_NEAR(d0, d1, 1e-12 * d0);
        EXPECT_NEAR(d1, d2, 1e-12 * d0);
        EXPECT_GT(barycentric_coordinates(t, c).minCoeff(), 0.0);
    }
}
