#include "psmpm/basis.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psmpm {

std::string to_string(BasisFamily family) { return family == BasisFamily::Hat ? "hat" : "ps"; }

BasisFamily basis_family_from_string(const std::string& name)
{
    if (name == "hat")
        return BasisFamily::Hat;
    if (name == "ps")
        return BasisFamily::PowellSabin;
    throw ValidationError("basis must be 'hat' or 'ps', got '" + name + "'");
}

double BasisEval::interpolate(std::span<const double> coeffs) const
{
    double s = 0.0;
    for (int a = 0; a < count; ++a)
        s += coeffs[index[a]] * value[a];
    return s;
}

Vec2 BasisEval::interpolate_gradient(std::span<const double> coeffs) const
{
    Vec2 g = Vec2::Zero();
    for (int a = 0; a < count; ++a)
        g += coeffs[index[a]] * grad[a];
    return g;
}

BasisEval BasisSet::eval(const Vec2& p) const
{
    auto r = try_eval(p);
    if (!r)
        throw Outside("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ") outside the mesh");
    return *r;
}

// ---------------------------------------------------------------------------
// HatBasis

HatBasis::HatBasis(std::shared_ptr<const Triangulation> mesh) : mesh_(std::move(mesh))
{
    maps_.reserve(mesh_->num_elements());
    for (int e = 0; e < mesh_->num_elements(); ++e)
        maps_.push_back(BarycentricMap::of(mesh_->element_vertices(e)));
}

std::span<const int> HatBasis::element_functions(int e) const
{
    return std::span<const int>(mesh_->elements()[e].data(), 3);
}

std::optional<BasisEval> HatBasis::try_eval(const Vec2& p) const
{
    const auto hit = mesh_->locate(p);
    if (!hit)
        return std::nullopt;
    BasisEval out;
    out.element = hit->element;
    out.count = 3;
    const auto& el = mesh_->elements()[hit->element];
    const auto& map = maps_[hit->element];
    for (int a = 0; a < 3; ++a) {
        out.index[a] = el[a];
        out.value[a] = hit->eta[a];
        out.grad[a] = map.grad.col(a);
    }
    return out;
}

std::shared_ptr<const HatBasis> hat_basis(std::shared_ptr<const Triangulation> mesh)
{
    return std::make_shared<const HatBasis>(std::move(mesh));
}

// ---------------------------------------------------------------------------
// PS-points and control triangles

std::vector<Vec2> ps_points(const PSRefinement& ref, int vertex)
{
    const Triangulation& tri = ref.mesh();
    const Vec2& v = tri.nodes()[vertex];
    std::vector<Vec2> pts{v};
    const double tol = 1e-12 * std::max(tri.scale(), 1e-300);
    auto add = [&](const Vec2& p) {
        for (const auto& q : pts)
            if ((q - p).norm() <= tol)
                return;
        pts.push_back(p);
    };
    for (int e : tri.vertex_elements(vertex)) {
        const auto& el = tri.elements()[e];
        const int k = static_cast<int>(std::find(el.begin(), el.end(), vertex) - el.begin());
        add(0.5 * (v + ref.local_edge_point(e, k)));
        add(0.5 * (v + ref.local_edge_point(e, (k + 2) % 3)));
        add(0.5 * (v + ref.interior_point(e)));
    }
    return pts;
}

namespace {

/// Counter-clockwise convex hull without collinear points.
std::vector<Vec2> convex_hull(std::span<const Vec2> input, double tol)
{
    std::vector<Vec2> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(),
              [](const Vec2& a, const Vec2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
    if (pts.size() < 3)
        return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= tol)
            --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= tol)
            --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

struct Line
{
    Vec2 point;
    Vec2 dir;
};

std::optional<Vec2> intersect(const Line& l1, const Line& l2)
{
    Mat2 m;
    m.col(0) = l1.dir;
    m.col(1) = -l2.dir;
    const double det = m.determinant();
    if (std::abs(det) <= 1e-12 * l1.dir.norm() * l2.dir.norm())
        return std::nullopt;
    const Vec2 st = m.inverse() * (l2.point - l1.point);
    return l1.point + st[0] * l1.dir;
}

bool contains_all(const TriangleVertices& t, std::span<const Vec2> pts)
{
    for (const auto& p : pts)
        if (barycentric_coordinates(t, p).minCoeff() < -1e-10)
            return false;
    return true;
}

} // namespace

ControlTriangle min_area_control_triangle(std::span<const Vec2> points)
{
    if (points.size() < 3)
        throw CollinearPoints("need at least three points");
    Vec2 lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double scale2 = (hi - lo).squaredNorm();
    const auto hull = convex_hull(points, 1e-12 * scale2);
    if (hull.size() < 3)
        throw CollinearPoints("convex hull is degenerate");

    const int n = static_cast<int>(hull.size());
    std::vector<Line> lines(n);
    for (int i = 0; i < n; ++i)
        lines[i] = {hull[i], hull[(i + 1) % n] - hull[i]};

    double best_area = std::numeric_limits<double>::infinity();
    TriangleVertices best{};
    auto consider = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
        TriangleVertices t{a, b, c};
        double area = signed_area(t);
        if (area < 0.0) {
            std::swap(t[1], t[2]);
            area = -area;
        }
        if (!(area > 1e-12 * scale2) || !(area < best_area * (1.0 - 1e-12)))
            return;
        if (!contains_all(t, points))
            return;
        best_area = area;
        best = t;
    };

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto o = intersect(lines[i], lines[j]);
            if (!o)
                continue;
            // two flush sides closed by a side whose midpoint is a hull vertex
            for (int k = 0; k < n; ++k) {
                if (k == i || k == (i + 1) % n || k == j || k == (j + 1) % n)
                    continue;
                Mat2 m;
                m.col(0) = lines[i].dir;
                m.col(1) = lines[j].dir;
                const Vec2 st = m.inverse() * (2.0 * (hull[k] - *o));
                consider(*o, *o + st[0] * lines[i].dir, *o + st[1] * lines[j].dir);
            }
            // three flush sides
            for (int k = j + 1; k < n; ++k) {
                const auto p = intersect(lines[j], lines[k]);
                const auto q = intersect(lines[k], lines[i]);
                if (p && q)
                    consider(*o, *p, *q);
            }
        }
    }
    if (!std::isfinite(best_area))
        throw CollinearPoints("no enclosing candidate triangle found");
    ControlTriangle ct;
    ct.q = best;
    ct.area = best_area;
    return ct;
}

std::array<Triplet, 3> compute_triplets(const ControlTriangle& ct, const Vec2& v)
{
    TriangleVertices t{ct.q[0], ct.q[1], ct.q[2]};
    const double area = signed_area(t);
    if (!(std::abs(area) > 1e-14 * bbox_scale_squared(t)))
        throw SingularControlTriangle("control triangle of vertex " + std::to_string(ct.vertex));
    Eigen::Matrix3d a;
    a << t[0].x(), t[1].x(), t[2].x(), t[0].y(), t[1].y(), t[2].y(), 1.0, 1.0, 1.0;
    Eigen::Matrix3d rhs;
    rhs << v.x(), 1.0, 0.0, v.y(), 0.0, 1.0, 1.0, 0.0, 0.0;
    const Eigen::Matrix3d sol = a.fullPivLu().solve(rhs);
    std::array<Triplet, 3> out;
    for (int q = 0; q < 3; ++q)
        out[q] = {sol(q, 0), sol(q, 1), sol(q, 2)};
    return out;
}

// ---------------------------------------------------------------------------
// Bernstein-Bezier representation

std::array<double, 6> bernstein(const Vec3& eta)
{
    return {eta[0] * eta[0],         eta[1] * eta[1],         eta[2] * eta[2],
            2.0 * eta[0] * eta[1], 2.0 * eta[0] * eta[2], 2.0 * eta[1] * eta[2]};
}

namespace {

constexpr std::array<std::array<int, 6>, 6> kSlots = {{
    {0, 4, 3, 7, 13, 16},  // (V0, R0, Z)
    {0, 3, 6, 13, 8, 18},  // (V0, Z, R2)
    {1, 5, 3, 9, 14, 17},  // (V1, R1, Z)
    {1, 3, 4, 14, 10, 16}, // (V1, Z, R0)
    {2, 6, 3, 11, 15, 18}, // (V2, R2, Z)
    {2, 3, 5, 15, 12, 17}, // (V2, Z, R1)
}};

} // namespace

const std::array<int, 6>& sub_triangle_slots(int s) { return kSlots[s]; }

Ordinates hermite_ordinates(const PSRefinement& ref, int e, const std::array<double, 3>& value,
                            const std::array<Vec2, 3>& grad)
{
    const auto v = ref.mesh().element_vertices(e);
    const Vec2& z = ref.interior_point(e);
    Ordinates b{};
    for (int k = 0; k < 3; ++k) {
        b[k] = value[k];
        b[7 + 2 * k] = value[k] + 0.5 * grad[k].dot(ref.local_edge_point(e, k) - v[k]);
        b[8 + 2 * k] = value[k] + 0.5 * grad[k].dot(ref.local_edge_point(e, (k + 2) % 3) - v[k]);
        b[13 + k] = value[k] + 0.5 * grad[k].dot(z - v[k]);
    }
    for (int k = 0; k < 3; ++k) {
        const int next = (k + 1) % 3;
        const double t = ref.local_edge_parameter(e, k);
        b[4 + k] = (1.0 - t) * b[7 + 2 * k] + t * b[8 + 2 * next];
        b[16 + k] = (1.0 - t) * b[13 + k] + t * b[13 + next];
    }
    const Vec3& abc = ref.interior_barycentric(e);
    b[3] = abc[0] * b[13] + abc[1] * b[14] + abc[2] * b[15];
    return b;
}

Ordinates compute_bezier_ordinates(const Triplet& triplet, const PSRefinement& ref, int e, int local_vertex)
{
    std::array<double, 3> value{0.0, 0.0, 0.0};
    std::array<Vec2, 3> grad{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
    value[local_vertex] = triplet.alpha;
    grad[local_vertex] = Vec2(triplet.beta, triplet.gamma);
    return hermite_ordinates(ref, e, value, grad);
}

// ---------------------------------------------------------------------------
// PsBasis

PsBasis::PsBasis(std::shared_ptr<const PSRefinement> ref) : ref_(std::move(ref))
{
    const Triangulation& tri = ref_->mesh();
    const int nv = tri.num_nodes();
    control_.resize(nv);
    triplets_.resize(nv);
    for (int i = 0; i < nv; ++i) {
        const auto pts = ps_points(*ref_, i);
        control_[i] = min_area_control_triangle(pts);
        control_[i].vertex = i;
        triplets_[i] = compute_triplets(control_[i], tri.nodes()[i]);
    }

    const int ne = tri.num_elements();
    functions_.resize(ne);
    tables_.resize(9 * static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) {
        for (int k = 0; k < 3; ++k) {
            const int vertex = tri.elements()[e][k];
            for (int q = 0; q < 3; ++q) {
                const int a = 3 * k + q;
                functions_[e][a] = 3 * vertex + q;
                tables_[9 * static_cast<std::size_t>(e) + a] =
                    compute_bezier_ordinates(triplets_[vertex][q], *ref_, e, k);
            }
        }
    }
}

std::span<const int> PsBasis::element_functions(int e) const { return std::span<const int>(functions_[e].data(), 9); }

std::optional<BasisEval> PsBasis::try_eval(const Vec2& p) const
{
    const auto loc = locate_point(*ref_, p);
    if (!loc)
        return std::nullopt;
    const SubTriangle& sub = ref_->sub_triangle(loc->element, loc->sub_triangle);
    const Vec3& eta = loc->eta;
    const auto bern = bernstein(eta);

    // d B_j / d eta_m, then chain rule through the constant map grad eta
    const Eigen::Matrix<double, 2, 3>& ge = sub.map.grad;
    const Vec2 g0 = ge.col(0), g1 = ge.col(1), g2 = ge.col(2);
    const std::array<Vec2, 6> bgrad = {
        2.0 * eta[0] * g0,
        2.0 * eta[1] * g1,
        2.0 * eta[2] * g2,
        2.0 * (eta[1] * g0 + eta[0] * g1),
        2.0 * (eta[2] * g0 + eta[0] * g2),
        2.0 * (eta[2] * g1 + eta[1] * g2),
    };
    const auto& slots = kSlots[loc->sub_triangle];

    BasisEval out;
    out.element = loc->element;
    out.count = 9;
    for (int a = 0; a < 9; ++a) {
        const Ordinates& ord = tables_[9 * static_cast<std::size_t>(loc->element) + a];
        double val = 0.0;
        Vec2 grad = Vec2::Zero();
        for (int j = 0; j < 6; ++j) {
            const double c = ord[slots[j]];
            val += c * bern[j];
            grad += c * bgrad[j];
        }
        out.index[a] = functions_[loc->element][a];
        out.value[a] = val;
        out.grad[a] = grad;
    }
    return out;
}

std::array<double, 3> PsBasis::hermite_coefficients(int vertex, double value, const Vec2& gradient) const
{
    const Vec2& v = ref_->mesh().nodes()[vertex];
    std::array<double, 3> c{};
    for (int q = 0; q < 3; ++q)
        c[q] = value + gradient.dot(control_[vertex].q[q] - v);
    return c;
}

std::shared_ptr<const PsBasis> ps_basis(std::shared_ptr<const PSRefinement> ref)
{
    return std::make_shared<const PsBasis>(std::move(ref));
}

} // namespace psmpm
