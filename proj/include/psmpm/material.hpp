#pragma once

#include "psmpm/geometry.hpp"

#include <string>

namespace psmpm {

enum class MaterialKind { LinearElastic, NeoHookean };

std::string to_string(MaterialKind kind);
MaterialKind material_kind_from_string(const std::string& name);

/// Isotropic elastic material in plane strain.
struct MaterialModel
{
    MaterialKind kind = MaterialKind::LinearElastic;
    double youngs_modulus = 1.0;
    double poisson_ratio = 0.0;

    bool operator==(const MaterialModel&) const = default;

    double lambda() const;
    double mu() const;
    /// Throws ValidationError unless E > 0 and -1 < nu < 0.5.
    void validate() const;

    /// Cauchy stress for deformation gradient D.
    Mat2 stress(const Mat2& deformation) const;
    /// Strain energy per unit current volume, consistent with stress().
    double energy_density(const Mat2& deformation) const;
};

} // namespace psmpm
