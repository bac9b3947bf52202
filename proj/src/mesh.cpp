#include "psmpm/mesh.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace psmpm {

// ---------------------------------------------------------------------------
// ElementBins

ElementBins::ElementBins(const std::vector<Vec2>& nodes, const std::vector<Element>& elements)
{
    if (nodes.empty() || elements.empty())
        return;
    lo_ = hi_ = nodes.front();
    for (const auto& p : nodes) {
        lo_ = lo_.cwiseMin(p);
        hi_ = hi_.cwiseMax(p);
    }
    double diam = 0.0;
    for (const auto& el : elements)
        diam += std::max({(nodes[el[0]] - nodes[el[1]]).norm(), (nodes[el[1]] - nodes[el[2]]).norm(),
                          (nodes[el[2]] - nodes[el[0]]).norm()});
    cell_ = diam / static_cast<double>(elements.size());
    const Vec2 ext = hi_ - lo_;
    nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));
    bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});

    auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
    for (int e = 0; e < static_cast<int>(elements.size()); ++e) {
        Vec2 elo = nodes[elements[e][0]];
        Vec2 ehi = elo;
        for (int k = 1; k < 3; ++k) {
            elo = elo.cwiseMin(nodes[elements[e][k]]);
            ehi = ehi.cwiseMax(nodes[elements[e][k]]);
        }
        // pad so points on shared edges see every touching element
        const double pad = 1e-9 * cell_;
        const int i0 = clampi(static_cast<int>(std::floor((elo.x() - pad - lo_.x()) / cell_)), nx_);
        const int i1 = clampi(static_cast<int>(std::floor((ehi.x() + pad - lo_.x()) / cell_)), nx_);
        const int j0 = clampi(static_cast<int>(std::floor((elo.y() - pad - lo_.y()) / cell_)), ny_);
        const int j1 = clampi(static_cast<int>(std::floor((ehi.y() + pad - lo_.y()) / cell_)), ny_);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(e);
    }
}

const std::vector<int>& ElementBins::candidates(const Vec2& p) const
{
    const double slack = 1e-9 * cell_;
    if (bins_.empty() || p.x() < lo_.x() - slack || p.y() < lo_.y() - slack || p.x() > hi_.x() + slack ||
        p.y() > hi_.y() + slack)
        return empty_;
    const int i = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / cell_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / cell_)), 0, ny_ - 1);
    return bins_[static_cast<std::size_t>(j) * nx_ + i];
}

// ---------------------------------------------------------------------------
// Triangulation

Triangulation::Triangulation(std::vector<Vec2> nodes, std::vector<Element> elements)
    : nodes_(std::move(nodes)), elements_(std::move(elements))
{
    const int nn = num_nodes();
    for (int e = 0; e < num_elements(); ++e) {
        auto& el = elements_[e];
        for (int k = 0; k < 3; ++k)
            if (el[k] < 0 || el[k] >= nn)
                throw InvalidMesh("element " + std::to_string(e) + " references missing node");
        if (el[0] == el[1] || el[1] == el[2] || el[0] == el[2])
            throw InvalidMesh("element " + std::to_string(e) + " repeats a node");
        TriangleVertices t = element_vertices(e);
        const double area = signed_area(t);
        if (!(std::abs(area) >= 1e-14 * bbox_scale_squared(t)) || area == 0.0)
            throw DegenerateTriangle("element " + std::to_string(e));
        if (area < 0.0)
            std::swap(el[1], el[2]);
    }

    std::map<std::pair<int, int>, int> edge_index;
    element_edges_.resize(elements_.size());
    for (int e = 0; e < num_elements(); ++e) {
        for (int k = 0; k < 3; ++k) {
            const int a = elements_[e][k];
            const int b = elements_[e][(k + 1) % 3];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
            if (inserted) {
                Edge edge;
                edge.a = a;
                edge.b = b;
                edge.elements = {e, -1};
                edges_.push_back(edge);
            } else {
                Edge& edge = edges_[it->second];
                if (edge.elements[1] >= 0)
                    throw InvalidMesh("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                      ") shared by more than two elements");
                if (edge.a == a)
                    throw InvalidMesh("inconsistent orientation across edge (" + std::to_string(a) + "," +
                                      std::to_string(b) + ")");
                edge.elements[1] = e;
            }
            element_edges_[e][k] = it->second;
        }
    }

    vertex_elements_.assign(nodes_.size(), {});
    for (int e = 0; e < num_elements(); ++e)
        for (int v : elements_[e])
            vertex_elements_[v].push_back(e);

    boundary_vertex_.assign(nodes_.size(), false);
    for (const Edge& edge : edges_) {
        if (!edge.on_boundary())
            continue;
        // counter-clockwise element: interior lies to the left of a -> b
        const Vec2 d = nodes_[edge.b] - nodes_[edge.a];
        boundary_edges_.push_back({edge.a, edge.b, Vec2(d.y(), -d.x()).normalized()});
        boundary_vertex_[edge.a] = true;
        boundary_vertex_[edge.b] = true;
    }

    if (!nodes_.empty()) {
        Vec2 lo = nodes_.front();
        Vec2 hi = lo;
        for (const auto& p : nodes_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        scale_ = (hi - lo).norm();
    }
    bins_ = ElementBins(nodes_, elements_);
}

TriangleVertices Triangulation::element_vertices(int e) const
{
    const auto& el = elements_[e];
    return {nodes_[el[0]], nodes_[el[1]], nodes_[el[2]]};
}

double Triangulation::mean_edge_length() const
{
    if (edges_.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto& edge : edges_)
        sum += (nodes_[edge.a] - nodes_[edge.b]).norm();
    return sum / static_cast<double>(edges_.size());
}

std::optional<ElementLocation> Triangulation::locate(const Vec2& p) const
{
    for (int e : bins_.candidates(p)) {
        const Vec3 eta = barycentric_coordinates(element_vertices(e), p);
        if (eta.minCoeff() >= -kLocateTolerance)
            return ElementLocation{e, eta};
    }
    return std::nullopt;
}

Molecule molecule_of(const Triangulation& tri, int vertex)
{
    return {vertex, tri.vertex_elements(vertex)};
}

// ---------------------------------------------------------------------------
// PSRefinement

PSRefinement::PSRefinement(std::shared_ptr<const Triangulation> mesh) : mesh_(std::move(mesh))
{
    const Triangulation& tri = *mesh_;
    const int ne = tri.num_elements();
    interior_points_.resize(ne);
    interior_bary_.resize(ne);
    for (int e = 0; e < ne; ++e) {
        const auto t = tri.element_vertices(e);
        interior_points_[e] = incenter(t);
        interior_bary_[e] = barycentric_coordinates(t, interior_points_[e]);
    }

    const auto& edges = tri.edges();
    edge_points_.resize(edges.size());
    edge_params_.resize(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& edge = edges[i];
        const Vec2& a = tri.nodes()[edge.a];
        const Vec2& b = tri.nodes()[edge.b];
        if (edge.on_boundary()) {
            edge_params_[i] = 0.5;
            edge_points_[i] = 0.5 * (a + b);
            continue;
        }
        // a + t (b - a) = Zj + s (Zm - Zj)
        const Vec2& zj = interior_points_[edge.elements[0]];
        const Vec2& zm = interior_points_[edge.elements[1]];
        Mat2 m;
        m.col(0) = b - a;
        m.col(1) = zj - zm;
        const double det = m.determinant();
        if (std::abs(det) <= 1e-14 * (b - a).squaredNorm())
            throw RefinementFailed("interior points parallel to edge " + std::to_string(i));
        const Vec2 ts = m.inverse() * (zj - a);
        const double t = ts[0];
        const double s = ts[1];
        if (!(t > 0.0 && t < 1.0) || s < -1e-12 || s > 1.0 + 1e-12)
            throw RefinementFailed("edge point outside edge " + std::to_string(i));
        edge_params_[i] = t;
        edge_points_[i] = a + t * (b - a);
    }

    sub_.reserve(6 * static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        const auto v = tri.element_vertices(e);
        const Vec2& z = interior_points_[e];
        for (int k = 0; k < 3; ++k) {
            const Vec2 r_next = local_edge_point(e, k);
            const Vec2 r_prev = local_edge_point(e, (k + 2) % 3);
            for (const TriangleVertices& st : {TriangleVertices{v[k], r_next, z}, TriangleVertices{v[k], z, r_prev}}) {
                SubTriangle sub;
                sub.vertices = st;
                sub.element = e;
                sub.corner = k;
                sub.map = BarycentricMap::of(st);
                sub_.push_back(sub);
            }
        }
    }
}

double PSRefinement::local_edge_parameter(int e, int k) const
{
    const int idx = mesh_->element_edge(e, k);
    const Edge& edge = mesh_->edges()[idx];
    const int a = mesh_->elements()[e][k];
    return edge.a == a ? edge_params_[idx] : 1.0 - edge_params_[idx];
}

Vec2 PSRefinement::local_edge_point(int e, int k) const { return edge_points_[mesh_->element_edge(e, k)]; }

double PSRefinement::mean_sub_edge_length() const
{
    const Triangulation& tri = *mesh_;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tri.edges().size(); ++i) {
        const Edge& edge = tri.edges()[i];
        sum += (tri.nodes()[edge.a] - tri.nodes()[edge.b]).norm(); // both halves
        count += 2;
    }
    for (int e = 0; e < tri.num_elements(); ++e) {
        const Vec2& z = interior_points_[e];
        for (int k = 0; k < 3; ++k) {
            sum += (tri.nodes()[tri.elements()[e][k]] - z).norm();
            sum += (local_edge_point(e, k) - z).norm();
            count += 2;
        }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

PSRefinement ps_refine(std::shared_ptr<const Triangulation> mesh) { return PSRefinement(std::move(mesh)); }

std::optional<Location> locate_point(const PSRefinement& ref, const Vec2& p)
{
    const auto hit = ref.mesh().locate(p);
    if (!hit)
        return std::nullopt;
    const int e = hit->element;
    int best = 0;
    double best_min = -1e300;
    Vec3 best_eta = Vec3::Zero();
    for (int s = 0; s < 6; ++s) {
        const Vec3 eta = ref.sub_triangle(e, s).map(p);
        const double m = eta.minCoeff();
        if (m >= -kLocateTolerance)
            return Location{e, s, eta};
        if (m > best_min) {
            best_min = m;
            best = s;
            best_eta = eta;
        }
    }
    // p sits on the element boundary within tolerance but just misses every
    // sub-triangle through round-off
    return Location{e, best, best_eta};
}

} // namespace psmpm
