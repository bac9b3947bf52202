#pragma once

#include "psmpm/geometry.hpp"
#include "psmpm/mesh.hpp"

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace psmpm {

enum class BasisFamily { Hat, PowellSabin };

std::string to_string(BasisFamily family);
BasisFamily basis_family_from_string(const std::string& name);

inline constexpr int kMaxActive = 9;

/// Values and gradients of the basis functions that are non-zero at a point.
struct BasisEval
{
    int element = -1;
    int count = 0;
    std::array<int, kMaxActive> index{};
    std::array<double, kMaxActive> value{};
    std::array<Vec2, kMaxActive> grad{};

    /// sum_a coeffs[index[a]] * value[a]
    double interpolate(std::span<const double> coeffs) const;
    Vec2 interpolate_gradient(std::span<const double> coeffs) const;
};

/// Uniform evaluation contract shared by the hat and Powell-Sabin families.
/// Implementations are immutable after construction and safe to evaluate
/// concurrently.
class BasisSet
{
  public:
    virtual ~BasisSet() = default;

    virtual BasisFamily family() const = 0;
    /// Total number of basis functions.
    virtual int size() const = 0;
    /// 1 for hats, 3 for Powell-Sabin splines. Function f belongs to vertex
    /// f / functions_per_vertex().
    virtual int functions_per_vertex() const = 0;
    virtual const Triangulation& mesh() const = 0;

    /// Functions active on element e, in a fixed order.
    virtual std::span<const int> element_functions(int e) const = 0;

    virtual std::optional<BasisEval> try_eval(const Vec2& p) const = 0;

    /// Throws Outside for points beyond the mesh.
    BasisEval eval(const Vec2& p) const;

    int vertex_of(int function) const { return function / functions_per_vertex(); }
};

// ---------------------------------------------------------------------------
// Piecewise-linear hats

class HatBasis final : public BasisSet
{
  public:
    explicit HatBasis(std::shared_ptr<const Triangulation> mesh);

    BasisFamily family() const override { return BasisFamily::Hat; }
    int size() const override { return mesh_->num_nodes(); }
    int functions_per_vertex() const override { return 1; }
    const Triangulation& mesh() const override { return *mesh_; }
    std::span<const int> element_functions(int e) const override;
    std::optional<BasisEval> try_eval(const Vec2& p) const override;

  private:
    std::shared_ptr<const Triangulation> mesh_;
    std::vector<BarycentricMap> maps_;
};

std::shared_ptr<const HatBasis> hat_basis(std::shared_ptr<const Triangulation> mesh);

// ---------------------------------------------------------------------------
// Powell-Sabin splines

struct ControlTriangle
{
    int vertex = -1;
    std::array<Vec2, 3> q{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
    double area = 0.0;
};

/// Value and gradient of one spline at its vertex.
struct Triplet
{
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// V_i plus the midpoints of every refinement edge with V_i at one end.
std::vector<Vec2> ps_points(const PSRefinement& ref, int vertex);

/// Smallest triangle with at least two sides on convex-hull edge lines of
/// `points` that contains every point. Candidates: three hull-edge lines,
/// and two hull-edge lines closed by a side through a hull vertex that is
/// its midpoint. Ties go to the lowest hull-edge index.
ControlTriangle min_area_control_triangle(std::span<const Vec2> points);

/// Solves [Q_x; Q_y; 1] T = [v_x 1 0; v_y 0 1; 1 0 0] for the three triplets.
std::array<Triplet, 3> compute_triplets(const ControlTriangle& ct, const Vec2& v);

/// Quadratic Bernstein polynomials in the order
/// B200, B020, B002, B110, B101, B011.
std::array<double, 6> bernstein(const Vec3& eta);

/// Bezier ordinates of one quadratic over the six sub-triangles of an
/// element. Slot layout (V_k local vertices, R_k edge point of local edge
/// V_k -> V_{k+1}, Z interior point):
///
///   0..2    V_0, V_1, V_2
///   3       Z
///   4..6    R_0, R_1, R_2
///   7+2k    mid(V_k, R_k)
///   8+2k    mid(V_k, R_{k-1})
///   13+k    mid(V_k, Z)
///   16+k    mid(R_k, Z)
using Ordinates = std::array<double, 19>;

/// Slots of the six Bernstein coefficients of sub-triangle s, in the order
/// of bernstein().
const std::array<int, 6>& sub_triangle_slots(int s);

/// C1 Powell-Sabin quadratic on element e interpolating vertex values and
/// gradients.
Ordinates hermite_ordinates(const PSRefinement& ref, int e, const std::array<double, 3>& value,
                            const std::array<Vec2, 3>& grad);

/// Ordinates of the spline with the given triplet at local vertex
/// `local_vertex` of element e, and zero data at the other two vertices.
Ordinates compute_bezier_ordinates(const Triplet& triplet, const PSRefinement& ref, int e, int local_vertex);

class PsBasis final : public BasisSet
{
  public:
    explicit PsBasis(std::shared_ptr<const PSRefinement> ref);

    BasisFamily family() const override { return BasisFamily::PowellSabin; }
    int size() const override { return 3 * ref_->mesh().num_nodes(); }
    int functions_per_vertex() const override { return 3; }
    const Triangulation& mesh() const override { return ref_->mesh(); }
    std::span<const int> element_functions(int e) const override;
    std::optional<BasisEval> try_eval(const Vec2& p) const override;

    const PSRefinement& refinement() const { return *ref_; }
    const ControlTriangle& control_triangle(int vertex) const { return control_[vertex]; }
    const std::array<Triplet, 3>& triplets(int vertex) const { return triplets_[vertex]; }
    /// Ordinates of the a-th function of element_functions(e).
    const Ordinates& ordinates(int e, int a) const { return tables_[9 * static_cast<std::size_t>(e) + a]; }

    /// Coefficients c^q = f + g . (Q^q - V) of the vertex's three splines
    /// that give the reconstructed field value f and gradient g at the
    /// vertex.
    std::array<double, 3> hermite_coefficients(int vertex, double value, const Vec2& gradient) const;

  private:
    std::shared_ptr<const PSRefinement> ref_;
    std::vector<ControlTriangle> control_;
    std::vector<std::array<Triplet, 3>> triplets_;
    std::vector<std::array<int, 9>> functions_;
    std::vector<Ordinates> tables_;
};

std::shared_ptr<const PsBasis> ps_basis(std::shared_ptr<const PSRefinement> ref);

} // namespace psmpm
