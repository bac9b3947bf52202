#include "psmpm/meshgen.hpp"

#include "psmpm/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace psmpm {

std::string to_string(MeshKind kind) { return kind == MeshKind::Structured ? "structured" : "jittered"; }

MeshKind mesh_kind_from_string(const std::string& name)
{
    if (name == "structured")
        return MeshKind::Structured;
    if (name == "jittered")
        return MeshKind::Jittered;
    throw ValidationError("mesh kind must be 'structured' or 'jittered', got '" + name + "'");
}

namespace {

int divisions(double extent, double h, const char* what)
{
    const double n = extent / h;
    const long rounded = std::lround(n);
    if (rounded < 1 || std::abs(n - static_cast<double>(rounded)) > 1e-9 * n)
        throw ValidationError(std::string("h does not divide the domain ") + what);
    return static_cast<int>(rounded);
}

/// Positive when d lies strictly inside the circumcircle of CCW (a, b, c).
double in_circle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

/// Lawson flips until every interior edge is locally Delaunay.
void make_delaunay(const std::vector<Vec2>& nodes, std::vector<Element>& elements, double h)
{
    const double eps = 1e-12 * h * h * h * h;
    for (int sweep = 0; sweep < 1000; ++sweep) {
        std::map<std::pair<int, int>, std::pair<int, int>> edge_owner; // (a,b) directed -> (element, local k)
        for (int e = 0; e < static_cast<int>(elements.size()); ++e)
            for (int k = 0; k < 3; ++k)
                edge_owner[{elements[e][k], elements[e][(k + 1) % 3]}] = {e, k};
        bool flipped = false;
        std::vector<bool> touched(elements.size(), false);
        for (const auto& [key, owner] : edge_owner) {
            const auto [a, b] = key;
            if (a > b)
                continue;
            const auto other = edge_owner.find({b, a});
            if (other == edge_owner.end())
                continue;
            const auto [e1, k1] = owner;
            const auto [e2, k2] = other->second;
            if (touched[e1] || touched[e2])
                continue;
            const int c = elements[e1][(k1 + 2) % 3]; // opposite a->b in e1
            const int d = elements[e2][(k2 + 2) % 3]; // opposite b->a in e2
            if (in_circle(nodes[a], nodes[b], nodes[c], nodes[d]) <= eps)
                continue;
            // new triangles (c, a, d) and (d, b, c), both CCW in a convex quad
            if (cross(nodes[c], nodes[a], nodes[d]) <= 0.0 || cross(nodes[d], nodes[b], nodes[c]) <= 0.0)
                continue;
            elements[e1] = {c, a, d};
            elements[e2] = {d, b, c};
            touched[e1] = touched[e2] = true;
            flipped = true;
        }
        if (!flipped)
            return;
    }
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

Triangulation structured_mesh(const Rect& domain, int nx, int ny)
{
    if (nx < 1 || ny < 1)
        throw ValidationError("structured mesh needs at least one cell per direction");
    const double hx = domain.width() / nx, hy = domain.height() / ny;
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.emplace_back(i == nx ? domain.hi.x() : domain.lo.x() + i * hx,
                               j == ny ? domain.hi.y() : domain.lo.y() + j * hy);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Element> elements;
    elements.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return Triangulation(std::move(nodes), std::move(elements));
}

Triangulation generate_mesh(MeshKind kind, double h, const Rect& domain, std::uint64_t seed)
{
    if (!(h > 0.0))
        throw ValidationError("mesh size h must be positive");
    const int nx = divisions(domain.width(), h, "width");
    const int ny = divisions(domain.height(), h, "height");
    const double hx = domain.width() / nx;
    const double hy = domain.height() / ny;

    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    std::mt19937_64 rng(seed);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Vec2 p(domain.lo.x() + i * hx, domain.lo.y() + j * hy);
            if (j == ny)
                p.y() = domain.hi.y();
            if (i == nx)
                p.x() = domain.hi.x();
            if (kind == MeshKind::Jittered) {
                const double dx = (2.0 * unit_uniform(rng) - 1.0) * 0.25 * h;
                const double dy = (2.0 * unit_uniform(rng) - 1.0) * 0.25 * h;
                if (i > 0 && i < nx && j > 0 && j < ny)
                    p += Vec2(dx, dy);
            }
            nodes.push_back(p);
        }
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Element> elements;
    elements.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    for (const auto& el : elements)
        if (cross(nodes[el[0]], nodes[el[1]], nodes[el[2]]) <= 0.0)
            throw MeshDegenerate("jitter inverted an element");
    if (kind == MeshKind::Jittered)
        make_delaunay(nodes, elements, h);
    for (const auto& el : elements)
        if (0.5 * cross(nodes[el[0]], nodes[el[1]], nodes[el[2]]) < 1e-3 * h * h)
            throw MeshDegenerate("element area below 1e-3 h^2");
    return Triangulation(std::move(nodes), std::move(elements));
}

// ---------------------------------------------------------------------------

Triangulation read_mesh(std::istream& in)
{
    enum class Section { None, Nodes, Elements } section = Section::None;
    std::vector<Vec2> nodes;
    std::vector<Element> elements;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first))
            continue;
        if (first == "nodes") {
            section = Section::Nodes;
            continue;
        }
        if (first == "elements") {
            section = Section::Elements;
            continue;
        }
        long index = 0;
        try {
            index = std::stol(first);
        } catch (const std::exception&) {
            throw ParseError(lineno, "expected an index, got '" + first + "'");
        }
        if (section == Section::Nodes) {
            double x = 0, y = 0;
            if (!(ls >> x >> y))
                throw ParseError(lineno, "node needs x y");
            if (index != static_cast<long>(nodes.size()))
                throw ParseError(lineno, "node indices must be consecutive from 0");
            nodes.emplace_back(x, y);
        } else if (section == Section::Elements) {
            Element el{};
            if (!(ls >> el[0] >> el[1] >> el[2]))
                throw ParseError(lineno, "element needs three node indices");
            if (index != static_cast<long>(elements.size()))
                throw ParseError(lineno, "element indices must be consecutive from 0");
            elements.push_back(el);
        } else {
            throw ParseError(lineno, "data before a 'nodes' or 'elements' header");
        }
        std::string extra;
        if (ls >> extra)
            throw ParseError(lineno, "trailing token '" + extra + "'");
    }
    if (nodes.empty() || elements.empty())
        throw ParseError(lineno, "mesh needs nodes and elements");
    return Triangulation(std::move(nodes), std::move(elements));
}

Triangulation read_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IOError("cannot open mesh file " + path.string());
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const Triangulation& mesh)
{
    out << std::setprecision(17);
    out << "# " << mesh.num_nodes() << " nodes, " << mesh.num_elements() << " elements\n";
    out << "nodes\n";
    for (int i = 0; i < mesh.num_nodes(); ++i)
        out << i << ' ' << mesh.nodes()[i].x() << ' ' << mesh.nodes()[i].y() << '\n';
    out << "elements\n";
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements()[e];
        out << e << ' ' << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
    }
}

void write_mesh(const std::filesystem::path& path, const Triangulation& mesh)
{
    std::ofstream out(path);
    if (!out)
        throw IOError("cannot write mesh file " + path.string());
    write_mesh(out, mesh);
    if (!out)
        throw IOError("write failed for " + path.string());
}

} // namespace psmpm
