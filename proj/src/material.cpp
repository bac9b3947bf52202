#include "psmpm/material.hpp"

#include "psmpm/error.hpp"

#include <cmath>

namespace psmpm {

std::string to_string(MaterialKind kind)
{
    return kind == MaterialKind::LinearElastic ? "linear" : "neo-hookean";
}

MaterialKind material_kind_from_string(const std::string& name)
{
    if (name == "linear" || name == "linear-elastic")
        return MaterialKind::LinearElastic;
    if (name == "neo-hookean" || name == "neohookean")
        return MaterialKind::NeoHookean;
    throw ValidationError("material kind must be linear or neo-hookean, got '" + name + "'");
}

double MaterialModel::lambda() const
{
    const double nu = poisson_ratio;
    return youngs_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
}

double MaterialModel::mu() const
{
    return youngs_modulus / (2.0 * (1.0 + poisson_ratio));
}

void MaterialModel::validate() const
{
    if (!(youngs_modulus > 0.0) || !std::isfinite(youngs_modulus))
        throw ValidationError("material.E must be positive");
    if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
        throw ValidationError("material.nu must lie in (-1, 0.5)");
}

Mat2 MaterialModel::stress(const Mat2& d) const
{
    const Mat2 id = Mat2::Identity();
    if (kind == MaterialKind::LinearElastic) {
        const Mat2 strain = 0.5 * (d + d.transpose()) - id;
        return lambda() * strain.trace() * id + 2.0 * mu() * strain;
    }
    const double j = d.determinant();
    return (lambda() * std::log(j) / j) * id + (mu() / j) * (d * d.transpose() - id);
}

double MaterialModel::energy_density(const Mat2& d) const
{
    if (kind == MaterialKind::LinearElastic) {
        const Mat2 strain = 0.5 * (d + d.transpose()) - Mat2::Identity();
        return 0.5 * (stress(d).cwiseProduct(strain)).sum();
    }
    const double j = d.determinant();
    const double lnj = std::log(j);
    const double w0 = 0.5 * mu() * ((d.transpose() * d).trace() - 2.0) - mu() * lnj + 0.5 * lambda() * lnj * lnj;
    return w0 / j;
}

} // namespace psmpm
