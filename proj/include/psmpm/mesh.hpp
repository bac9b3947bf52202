#pragma once

#include "psmpm/geometry.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace psmpm {

using Element = std::array<int, 3>;

struct BoundaryEdge
{
    int a = -1;
    int b = -1;
    Vec2 normal = Vec2::Zero(); // outward unit normal
};

/// Undirected mesh edge. `elements[1]` is -1 on the boundary.
struct Edge
{
    int a = -1;
    int b = -1;
    std::array<int, 2> elements{-1, -1};

    bool on_boundary() const { return elements[1] < 0; }
};

/// Uniform background bins over the mesh bounding box. Each bin lists, in
/// ascending order, the elements whose bounding box overlaps it.
class ElementBins
{
  public:
    ElementBins() = default;
    ElementBins(const std::vector<Vec2>& nodes, const std::vector<Element>& elements);

    /// Candidate elements for p; empty when p is outside the bounding box.
    const std::vector<int>& candidates(const Vec2& p) const;

  private:
    Vec2 lo_ = Vec2::Zero();
    Vec2 hi_ = Vec2::Zero();
    double cell_ = 1.0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<std::vector<int>> bins_;
    std::vector<int> empty_;
};

/// Point inside a single element.
struct ElementLocation
{
    int element = -1;
    Vec3 eta = Vec3::Zero();
};

/// Node-element triangulation. Elements are stored counter-clockwise;
/// clockwise input is reoriented, zero-area input is rejected.
class Triangulation
{
  public:
    Triangulation(std::vector<Vec2> nodes, std::vector<Element> elements);

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }

    TriangleVertices element_vertices(int e) const;
    double element_area(int e) const { return signed_area(element_vertices(e)); }

    /// Edge index of local edge k, which runs from vertex k to vertex k+1.
    int element_edge(int e, int k) const { return element_edges_[e][k]; }
    const std::vector<int>& vertex_elements(int v) const { return vertex_elements_[v]; }
    bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }

    /// Diagonal of the node bounding box.
    double scale() const { return scale_; }
    double mean_edge_length() const;

    /// Containing element with lowest index, tolerance 1e-12 on barycentrics.
    std::optional<ElementLocation> locate(const Vec2& p) const;
    const ElementBins& bins() const { return bins_; }

  private:
    std::vector<Vec2> nodes_;
    std::vector<Element> elements_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> element_edges_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<std::vector<int>> vertex_elements_;
    std::vector<bool> boundary_vertex_;
    double scale_ = 0.0;
    ElementBins bins_;
};

/// Union of the elements incident to a vertex: the support of its basis
/// functions.
struct Molecule
{
    int vertex = -1;
    std::vector<int> elements;
};

Molecule molecule_of(const Triangulation& tri, int vertex);

/// One of the six Powell-Sabin sub-triangles of an element.
///
/// Sub-triangle 2k is (V_k, R_k, Z) and 2k+1 is (V_k, Z, R_{k-1}), where
/// R_k is the edge point of local edge k (V_k -> V_{k+1}) and Z the
/// interior point. Both are counter-clockwise.
struct SubTriangle
{
    TriangleVertices vertices;
    int element = -1;
    int corner = -1; // local index of the parent vertex
    BarycentricMap map;
};

struct Location
{
    int element = -1;
    int sub_triangle = -1; // 0..5 within the element
    Vec3 eta = Vec3::Zero();
};

/// Powell-Sabin 6-split of a triangulation. Interior points are incenters,
/// boundary edge points are edge midpoints.
class PSRefinement
{
  public:
    explicit PSRefinement(std::shared_ptr<const Triangulation> mesh);

    const Triangulation& mesh() const { return *mesh_; }
    std::shared_ptr<const Triangulation> mesh_ptr() const { return mesh_; }

    const Vec2& interior_point(int e) const { return interior_points_[e]; }
    const Vec2& edge_point(int edge) const { return edge_points_[edge]; }

    /// Edge point of local edge k of element e, with its parameter t such
    /// that R = (1 - t) V_k + t V_{k+1}.
    Vec2 local_edge_point(int e, int k) const;
    double local_edge_parameter(int e, int k) const;

    /// Barycentric coordinates (a, b, c) of Z w.r.t. the element vertices.
    const Vec3& interior_barycentric(int e) const { return interior_bary_[e]; }

    const SubTriangle& sub_triangle(int e, int s) const { return sub_[6 * e + s]; }
    const std::vector<SubTriangle>& sub_triangles() const { return sub_; }

    /// Mean edge length over all sub-triangle edges.
    double mean_sub_edge_length() const;

  private:
    std::shared_ptr<const Triangulation> mesh_;
    std::vector<Vec2> interior_points_;
    std::vector<Vec3> interior_bary_;
    std::vector<Vec2> edge_points_;
    std::vector<double> edge_params_; // w.r.t. Edge::a -> Edge::b
    std::vector<SubTriangle> sub_;
};

PSRefinement ps_refine(std::shared_ptr<const Triangulation> mesh);

/// Sub-triangle containing p; ties go to the lowest (element, sub-triangle)
/// pair. Empty when p lies outside the mesh.
std::optional<Location> locate_point(const PSRefinement& ref, const Vec2& p);

/// Barycentric tolerance used by all containment tests.
inline constexpr double kLocateTolerance = 1e-12;

} // namespace psmpm
