#include "psmpm/basis_check.hpp"

#include "psmpm/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace psmpm {

namespace {

Vec2 random_point(const Triangulation& mesh, int e, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    const auto t = mesh.element_vertices(e);
    return t[0] + a * (t[1] - t[0]) + b * (t[2] - t[0]);
}

Vec2 piece_gradient(const PsBasis& basis, int e, int s, int a, const Vec2& p, double h)
{
    const Vec2 dx(h, 0.0), dy(0.0, h);
    return Vec2((piece_value(basis, e, s, a, p + dx) - piece_value(basis, e, s, a, p - dx)) / (2.0 * h),
                (piece_value(basis, e, s, a, p + dy) - piece_value(basis, e, s, a, p - dy)) / (2.0 * h));
}

double value_of(const BasisEval& ev, int f)
{
    for (int a = 0; a < ev.count; ++a)
        if (ev.index[a] == f)
            return ev.value[a];
    return 0.0;
}

struct EdgeSide
{
    int e;
    int s;
};

struct SharedEdge
{
    Vec2 a, b;
    EdgeSide first, second;
};

std::vector<SharedEdge> shared_sub_edges(const PSRefinement& ref)
{
    const double quantum = 1e-9 * ref.mesh().scale();
    auto key = [quantum](const Vec2& p) {
        return std::pair<long long, long long>(std::llround(p.x() / quantum), std::llround(p.y() / quantum));
    };
    std::map<std::pair<std::pair<long long, long long>, std::pair<long long, long long>>, std::vector<int>> seen;
    const auto& subs = ref.sub_triangles();
    std::vector<SharedEdge> out;
    for (int i = 0; i < static_cast<int>(subs.size()); ++i) {
        for (int k = 0; k < 3; ++k) {
            const Vec2& a = subs[i].vertices[k];
            const Vec2& b = subs[i].vertices[(k + 1) % 3];
            auto ka = key(a), kb = key(b);
            if (kb < ka)
                std::swap(ka, kb);
            auto& list = seen[{ka, kb}];
            for (int j : list)
                out.push_back({a, b, {subs[j].element, j % 6}, {subs[i].element, i % 6}});
            list.push_back(i);
        }
    }
    return out;
}

std::string describe(const char* what, double value, double limit)
{
    std::ostringstream os;
    os << what << ": " << std::setprecision(3) << value << " exceeds " << limit;
    return os.str();
}

} // namespace

std::vector<std::string> BasisCheckReport::violations() const
{
    std::vector<std::string> out;
    if (!(partition_of_unity < 1e-10))
        out.push_back(describe("partition of unity", partition_of_unity, 1e-10));
    if (!(gradient_sum < 1e-9))
        out.push_back(describe("gradient sum (scaled)", gradient_sum, 1e-9));
    if (!(min_value >= -1e-12))
        out.push_back(describe("negative value", -min_value, 1e-12));
    if (!(edge_value_jump < 1e-9))
        out.push_back(describe("C1 value mismatch", edge_value_jump, 1e-9));
    if (!(edge_gradient_jump < 1e-9))
        out.push_back(describe("C1 gradient mismatch", edge_gradient_jump, 1e-9));
    if (!(molecule_boundary < 1e-10))
        out.push_back(describe("molecule boundary", molecule_boundary, 1e-10));
    if (!(linear_reproduction < 1e-10))
        out.push_back(describe("linear reproduction", linear_reproduction, 1e-10));
    if (!(gradient_fd < 1e-5))
        out.push_back(describe("finite-difference gradient", gradient_fd, 1e-5));
    return out;
}

double piece_value(const PsBasis& basis, int e, int s, int a, const Vec2& p)
{
    const Vec3 eta = barycentric_coordinates(basis.refinement().sub_triangle(e, s).vertices, p);
    const auto b = bernstein(eta);
    const auto& slots = sub_triangle_slots(s);
    const auto& ord = basis.ordinates(e, a);
    double v = 0.0;
    for (int k = 0; k < 6; ++k)
        v += ord[slots[k]] * b[k];
    return v;
}

BasisCheckReport check_basis(const PsBasis& basis, const BasisCheckOptions& options)
{
    const Triangulation& mesh = basis.mesh();
    const double scale = mesh.scale();
    BasisCheckReport r;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<double> linear(basis.size());
    auto affine = [](const Vec2& p) { return 0.3 - 1.7 * p.x() + 2.2 * p.y(); };
    for (int v = 0; v < mesh.num_nodes(); ++v)
        for (int q = 0; q < 3; ++q)
            linear[3 * v + q] = affine(basis.control_triangle(v).q[q]);

    for (int i = 0; i < options.interior_samples; ++i) {
        const int e = static_cast<int>(rng() % mesh.num_elements());
        const Vec2 p = random_point(mesh, e, rng);
        const BasisEval ev = basis.eval(p);
        double sum = 0.0;
        Vec2 gsum = Vec2::Zero();
        for (int a = 0; a < ev.count; ++a) {
            r.min_value = std::min(r.min_value, ev.value[a]);
            sum += ev.value[a];
            gsum += ev.grad[a];
        }
        r.partition_of_unity = std::max(r.partition_of_unity, std::abs(sum - 1.0));
        r.gradient_sum = std::max(r.gradient_sum, gsum.norm() * scale);
        r.linear_reproduction = std::max(r.linear_reproduction, std::abs(ev.interpolate(linear) - affine(p)));
    }

    const double fd_step = 1e-6 * scale;
    for (int i = 0; i < options.gradient_samples; ++i) {
        const int e = static_cast<int>(rng() % mesh.num_elements());
        const Vec2 p = random_point(mesh, e, rng);
        const BasisEval ev = basis.eval(p);
        const auto px = basis.try_eval(p + Vec2(fd_step, 0)), mx = basis.try_eval(p - Vec2(fd_step, 0));
        const auto py = basis.try_eval(p + Vec2(0, fd_step)), my = basis.try_eval(p - Vec2(0, fd_step));
        if (!px || !mx || !py || !my)
            continue;
        for (int a = 0; a < ev.count; ++a) {
            const int f = ev.index[a];
            const Vec2 fd((value_of(*px, f) - value_of(*mx, f)) / (2.0 * fd_step),
                          (value_of(*py, f) - value_of(*my, f)) / (2.0 * fd_step));
            r.gradient_fd = std::max(r.gradient_fd, (fd - ev.grad[a]).norm() / std::max(1.0, ev.grad[a].norm()));
        }
    }

    const double piece_step = 1e-4 * scale;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto v = mesh.element_vertices(e);
        for (int k = 0; k < 3; ++k) {
            // the edge opposite local vertex k bounds that vertex's molecule
            const Vec2 a = v[(k + 1) % 3], b = v[(k + 2) % 3];
            for (int i = 0; i < options.boundary_samples_per_edge; ++i) {
                const Vec2 p = a + u(rng) * (b - a);
                for (int s = 0; s < 6; ++s) {
                    if (barycentric_coordinates(basis.refinement().sub_triangle(e, s).vertices, p).minCoeff() < -1e-12)
                        continue;
                    for (int q = 0; q < 3; ++q) {
                        const int fn = 3 * k + q;
                        r.molecule_boundary = std::max(
                            {r.molecule_boundary, std::abs(piece_value(basis, e, s, fn, p)),
                             piece_gradient(basis, e, s, fn, p, piece_step).norm()});
                    }
                }
            }
        }
    }

    const auto shared = shared_sub_edges(basis.refinement());
    if (!shared.empty()) {
        for (int i = 0; i < options.edge_samples; ++i) {
            const SharedEdge& se = shared[rng() % shared.size()];
            const Vec2 p = se.a + u(rng) * (se.b - se.a);
            std::map<int, std::pair<double, Vec2>> one, two;
            for (int k = 0; k < 9; ++k) {
                one[basis.element_functions(se.first.e)[k]] = {
                    piece_value(basis, se.first.e, se.first.s, k, p),
                    piece_gradient(basis, se.first.e, se.first.s, k, p, piece_step)};
                two[basis.element_functions(se.second.e)[k]] = {
                    piece_value(basis, se.second.e, se.second.s, k, p),
                    piece_gradient(basis, se.second.e, se.second.s, k, p, piece_step)};
            }
            auto compare = [&](const auto& from, const auto& other) {
                for (const auto& [f, val] : from) {
                    const auto it = other.find(f);
                    const double v2 = it == other.end() ? 0.0 : it->second.first;
                    const Vec2 g2 = it == other.end() ? Vec2::Zero() : it->second.second;
                    r.edge_value_jump = std::max(r.edge_value_jump, std::abs(val.first - v2));
                    r.edge_gradient_jump = std::max(r.edge_gradient_jump,
                                                    (val.second - g2).norm() / std::max(1.0, val.second.norm()));
                }
            };
            compare(one, two);
            compare(two, one);
            ++r.edge_samples;
        }
    }
    return r;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw IOError("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

} // namespace

void write_control_triangles_csv(const PsBasis& basis, const std::filesystem::path& path)
{
    auto out = open_csv(path);
    out << "vertex,q0x,q0y,q1x,q1y,q2x,q2y,area\n";
    for (int v = 0; v < basis.mesh().num_nodes(); ++v) {
        const auto& ct = basis.control_triangle(v);
        out << v;
        for (const auto& q : ct.q)
            out << ',' << q.x() << ',' << q.y();
        out << ',' << ct.area << '\n';
    }
    if (!out)
        throw IOError("failed writing " + path.string());
}

void write_triplets_csv(const PsBasis& basis, const std::filesystem::path& path)
{
    auto out = open_csv(path);
    out << "vertex,k,alpha,beta,gamma\n";
    for (int v = 0; v < basis.mesh().num_nodes(); ++v) {
        const auto& t = basis.triplets(v);
        for (int k = 0; k < 3; ++k)
            out << v << ',' << k << ',' << t[k].alpha << ',' << t[k].beta << ',' << t[k].gamma << '\n';
    }
    if (!out)
        throw IOError("failed writing " + path.string());
}

} // namespace psmpm
