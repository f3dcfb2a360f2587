#pragma once

#include "geods/geomodel.hpp"
#include "geods/grid.hpp"

#include <span>
#include <vector>

namespace geods {

/**
 * Volume-weighted arithmetic mean of the fine values inside each coarse cell.
 * Fine cells nest exactly inside coarse cells, so all weights are 1 and the
 * result is the plain mean of the children.
 */
std::vector<double> upscale_property(const ScaleMap& map, std::span<const double> fine_values);

/**
 * Coarse material: E, nu and rho averaged from the fine field; pore pressure
 * re-evaluated from the gradient at coarse centroids.
 */
MaterialField upscale_material(const ScaleMap& map, const MaterialField& fine,
                               double pressure_gradient_kpa_per_m);

} // namespace geods
