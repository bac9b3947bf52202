#include "psmpm/error.hpp"
#include "psmpm/mesh.hpp"
#include "psmpm/meshgen.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace psmpm;
using namespace psmpm::testing;

TEST(Triangulation, ReorientsClockwiseElements)
{
    Triangulation t({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 2, 1}});
    EXPECT_GT(t.element_area(0), 0.0);
    EXPECT_EQ(t.boundary_edges().size(), 3u);
}

TEST(Triangulation, EdgeSharingAndNormals)
{
    auto mesh = two_triangle_square();
    ASSERT_EQ(mesh->edges().size(), 5u);
    int interior = 0;
    for (const auto& e : mesh->edges())
        interior += e.on_boundary() ? 0 : 1;
    EXPECT_EQ(interior, 1);
    for (const auto& be : mesh->boundary_edges()) {
        const Vec2 mid = 0.5 * (mesh->nodes()[be.a] + mesh->nodes()[be.b]);
        // outward: stepping along the normal leaves the unit square
        const Vec2 out = mid + 0.1 * be.normal;
        EXPECT_FALSE(out.x() > 0 && out.x() < 1 && out.y() > 0 && out.y() < 1);
        EXPECT_NEAR(be.normal.norm(), 1.0, 1e-15);
    }
}

TEST(Triangulation, RejectsNonManifoldEdges)
{
    EXPECT_THROW(Triangulation({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(0, -1), Vec2(1, 1)},
                               {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}}),
                 InvalidMesh);
    EXPECT_THROW(Triangulation({Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}, {{0, 1, 2}}), DegenerateTriangle);
}

TEST(PsRefine, SingleTriangleUsesMidpoints)
{
    auto mesh = single_triangle();
    const PSRefinement ref = ps_refine(mesh);
    EXPECT_EQ(ref.sub_triangles().size(), 6u);
    for (int k = 0; k < 3; ++k) {
        const auto v = mesh->element_vertices(0);
        EXPECT_NEAR((ref.local_edge_point(0, k) - 0.5 * (v[k] + v[(k + 1) % 3])).norm(), 0.0, 1e-15);
        EXPECT_DOUBLE_EQ(ref.local_edge_parameter(0, k), 0.5);
    }
    for (const auto& s : ref.sub_triangles()) {
        EXPECT_GT(signed_area(s.vertices), 0.0);
        EXPECT_EQ(s.vertices[0], mesh->element_vertices(0)[s.corner]);
    }
}

TEST(PsRefine, MirrorSymmetricPairHitsSharedMidpoint)
{
    const double s = std::sqrt(3.0) / 2.0;
    auto mesh = make_shared_mesh(Triangulation({Vec2(0, 0), Vec2(1, 0), Vec2(0.5, s), Vec2(0.5, -s)},
                                               {{0, 1, 2}, {0, 3, 1}}));
    const PSRefinement ref = ps_refine(mesh);
    for (std::size_t i = 0; i < mesh->edges().size(); ++i) {
        const Edge& e = mesh->edges()[i];
        if (!e.on_boundary())
            EXPECT_NEAR((ref.edge_point(static_cast<int>(i)) - Vec2(0.5, 0.0)).norm(), 0.0, 1e-14);
    }
}

TEST(PsRefine, InvariantsOnJitteredMeshes)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto mesh = jittered_unit_square(0.125, seed);
        const PSRefinement ref = ps_refine(mesh);
        for (int e = 0; e < mesh->num_elements(); ++e) {
            const auto t = mesh->element_vertices(e);
            EXPECT_GT(barycentric_coordinates(t, ref.interior_point(e)).minCoeff(), 0.0);
            double sum = 0.0;
            for (int s = 0; s < 6; ++s) {
                const double a = signed_area(ref.sub_triangle(e, s).vertices);
                EXPECT_GT(a, 0.0);
                sum += a;
            }
            EXPECT_NEAR(sum, mesh->element_area(e), 1e-12 * mesh->element_area(e));
        }
        for (std::size_t i = 0; i < mesh->edges().size(); ++i) {
            const Edge& edge = mesh->edges()[i];
            if (edge.on_boundary())
                continue;
            const Vec2& a = mesh->nodes()[edge.a];
            const Vec2& b = mesh->nodes()[edge.b];
            const Vec2& r = ref.edge_point(static_cast<int>(i));
            const Vec2& zj = ref.interior_point(edge.elements[0]);
            const Vec2& zm = ref.interior_point(edge.elements[1]);
            // strictly inside the edge and on segment Zj-Zm, from both sides
            const double t = (r - a).dot(b - a) / (b - a).squaredNorm();
            EXPECT_GT(t, 0.0);
            EXPECT_LT(t, 1.0);
            EXPECT_NEAR(std::abs(cross(a, b, r)), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(cross(zj, zm, r)) / (zm - zj).norm(), 0.0, 1e-12);
            const int ej = edge.elements[0], em = edge.elements[1];
            for (int side : {ej, em}) {
                for (int k = 0; k < 3; ++k)
                    if (mesh->element_edge(side, k) == static_cast<int>(i))
                        EXPECT_NEAR((ref.local_edge_point(side, k) - r).norm(), 0.0, 1e-12);
            }
        }
    }
}

TEST(LocatePoint, IncenterAndOutside)
{
    auto mesh = jittered_unit_square(0.25, 3);
    const PSRefinement ref = ps_refine(mesh);
    for (int e = 0; e < mesh->num_elements(); ++e) {
        const auto loc = locate_point(ref, ref.interior_point(e));
        ASSERT_TRUE(loc);
        EXPECT_EQ(loc->element, e);
    }
    EXPECT_FALSE(locate_point(ref, Vec2(1.5, 0.5)));
    EXPECT_FALSE(locate_point(ref, Vec2(-0.01, 0.5)));
}

TEST(LocatePoint, LatticeMatchesBruteForce)
{
    auto mesh = two_triangle_square();
    const PSRefinement ref = ps_refine(mesh);
    const int n = 41;
    for (int j = -2; j <= n + 1; ++j) {
        for (int i = -2; i <= n + 1; ++i) {
            const Vec2 p(static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1));
            // oracle: first sub-triangle in (element, sub) order containing p
            std::optional<std::pair<int, int>> expected;
            for (int e = 0; e < 2 && !expected; ++e)
                for (int s = 0; s < 6 && !expected; ++s)
                    if (barycentric_coordinates(ref.sub_triangle(e, s).vertices, p).minCoeff() >= -1e-12)
                        expected = std::pair{e, s};
            const auto loc = locate_point(ref, p);
            ASSERT_EQ(loc.has_value(), expected.has_value()) << p.transpose();
            if (!loc)
                continue;
            EXPECT_EQ(loc->element, expected->first);
            EXPECT_EQ(loc->sub_triangle, expected->second);
            const auto& v = ref.sub_triangle(loc->element, loc->sub_triangle).vertices;
            const Vec2 back = loc->eta[0] * v[0] + loc->eta[1] * v[1] + loc->eta[2] * v[2];
            EXPECT_NEAR((back - p).norm(), 0.0, 1e-12);
        }
    }
}

TEST(LocatePoint, RandomInteriorPointsFallInOwnElement)
{
    std::mt19937_64 rng(5);
    auto mesh = jittered_unit_square(0.125, 9);
    const PSRefinement ref = ps_refine(mesh);
    for (int e = 0; e < mesh->num_elements(); ++e) {
        for (int trial = 0; trial < 20; ++trial) {
            const Vec2 p = random_point_in(*mesh, e, rng);
            const auto loc = locate_point(ref, p);
            ASSERT_TRUE(loc);
            // exactly one sub-triangle of the owning element contains p
            int hits = 0;
            for (int s = 0; s < 6; ++s)
                hits += ref.sub_triangle(loc->element, s).map(p).minCoeff() > 1e-9 ? 1 : 0;
            EXPECT_LE(hits, 1);
            if (barycentric_coordinates(mesh->element_vertices(e), p).minCoeff() > 1e-9)
                EXPECT_EQ(loc->element, e);
        }
    }
}

TEST(Molecule, FanCornerAndBruteForce)
{
    EXPECT_EQ(molecule_of(*hexagon_fan(), 0).elements.size(), 6u);
    auto square = two_triangle_square();
    EXPECT_EQ(molecule_of(*square, 1).elements.size(), 1u);
    EXPECT_EQ(molecule_of(*square, 0).elements.size(), 2u);

    auto mesh = jittered_unit_square(0.125, 4);
    for (int v = 0; v < mesh->num_nodes(); ++v) {
        std::vector<int> expected;
        for (int e = 0; e < mesh->num_elements(); ++e) {
            const auto& el = mesh->elements()[e];
            if (std::find(el.begin(), el.end(), v) != el.end())
                expected.push_back(e);
        }
        auto got = molecule_of(*mesh, v).elements;
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, expected);
    }
}

TEST(MeshGen, StructuredCounts)
{
    const auto mesh = generate_mesh(MeshKind::Structured, 0.5, Rect{Vec2(0, 0), Vec2(1, 1)});
    EXPECT_EQ(mesh.num_nodes(), 9);
    EXPECT_EQ(mesh.num_elements(), 8);
    EXPECT_THROW(generate_mesh(MeshKind::Structured, 0.3, Rect{Vec2(0, 0), Vec2(1, 1)}), ValidationError);
}

TEST(MeshGen, JitteredIsDeterministic)
{
    const Rect unit{Vec2(0, 0), Vec2(1, 1)};
    const auto a = generate_mesh(MeshKind::Jittered, 0.125, unit, 42);
    const auto b = generate_mesh(MeshKind::Jittered, 0.125, unit, 42);
    ASSERT_EQ(a.num_nodes(), b.num_nodes());
    ASSERT_EQ(a.elements(), b.elements());
    for (int i = 0; i < a.num_nodes(); ++i)
        EXPECT_EQ(a.nodes()[i], b.nodes()[i]);
    const auto c = generate_mesh(MeshKind::Jittered, 0.125, unit, 43);
    EXPECT_NE(a.nodes()[10], c.nodes()[10]);
}

TEST(MeshGen, JitteredInvariantSweep)
{
    const Rect unit{Vec2(0, 0), Vec2(1, 1)};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto mesh = generate_mesh(MeshKind::Jittered, 0.125, unit, seed);
        double area = 0.0;
        for (int e = 0; e < mesh.num_elements(); ++e) {
            EXPECT_GE(mesh.element_area(e), 1e-3 * 0.125 * 0.125);
            area += mesh.element_area(e);
        }
        EXPECT_NEAR(area, 1.0, 1e-12);
        std::size_t boundary = 0;
        for (const auto& e : mesh.edges())
            boundary += e.on_boundary() ? 1 : 0;
        EXPECT_EQ(boundary, 32u);
        EXPECT_NO_THROW(ps_refine(std::make_shared<const Triangulation>(mesh)));
    }
}

TEST(MeshFile, WriteThenReadRoundTrips)
{
    const auto mesh = generate_mesh(MeshKind::Jittered, 0.25, Rect{Vec2(0, 0), Vec2(1, 1)}, 3);
    std::stringstream ss;
    write_mesh(ss, mesh);
    const auto back = read_mesh(ss);
    ASSERT_EQ(back.num_nodes(), mesh.num_nodes());
    EXPECT_EQ(back.elements(), mesh.elements());
    for (int i = 0; i < mesh.num_nodes(); ++i)
        EXPECT_EQ(back.nodes()[i], mesh.nodes()[i]);
}

TEST(MeshFile, ParseErrorsCarryLineNumbers)
{
    std::istringstream in("# header\nnodes\n0 0 0\n1 1 0\n2 0 oops\n");
    try {
        read_mesh(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5);
    }
}
