#pragma once

#include "geods/grid.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace geods {

// Physical bounds accepted for generated properties.
inline constexpr double kYoungsMinGPa = 5.0;
inline constexpr double kYoungsMaxGPa = 85.0;
inline constexpr double kPoissonMin = 0.2;
inline constexpr double kPoissonMax = 0.42;
inline constexpr double kDensityMin = 2.1; // g/cm3
inline constexpr double kDensityMax = 2.5;
inline constexpr double kDefaultPressureGradient = 10.63; // kPa/m

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

enum class HorizontalAxis { east_west, north_south };

/// Per-cell rock properties over a grid.
struct MaterialField {
    StructuredGrid grid;
    std::vector<double> E;   // Young's modulus, GPa
    std::vector<double> nu;  // Poisson's ratio
    std::vector<double> rho; // bulk density, g/cm3
    std::vector<double> pp;  // pore pressure, MPa

    explicit MaterialField(StructuredGrid g);
    MaterialField(StructuredGrid g, double E_const, double nu_const, double rho_const,
                  double pp_const);
};

struct GeomodelSpec {
    std::uint64_t seed = 1;
    int n_layers = 40;
    Range layer_thickness{36.0, 108.0};         // m
    double lateral_correlation_length = 1500.0; // m, 1/e decay of the lateral autocorrelation
    double lateral_relative_std = 0.04;         // relative amplitude of in-layer variation
    double fold_amplitude = 60.0;               // m, uplift of layer surfaces at the crest
    double fold_width = 1500.0;                 // m, Gaussian standard deviation across the axis
    HorizontalAxis fold_axis = HorizontalAxis::north_south;
    std::optional<double> fold_center;          // across-axis coordinate; default mid-extent
    Range youngs{kYoungsMinGPa, kYoungsMaxGPa};
    Range poisson{kPoissonMin, kPoissonMax};
    Range density{kDensityMin, kDensityMax};
    double pressure_gradient = kDefaultPressureGradient; // kPa/m
};

/// Throws ConfigError when the spec is outside physical bounds.
void validate(const GeomodelSpec& spec);

/**
 * Layered, laterally correlated, folded property model.
 *
 * Layer thicknesses and per-layer mean E, nu, rho are uniform draws over the
 * configured ranges. Layer surfaces are lifted by a Gaussian ridge whose crest
 * runs along `fold_axis`. Within each layer every property carries an
 * independent smooth random field with Gaussian covariance
 * exp(-(r/L)^2), L = lateral_correlation_length. Values are clipped to the
 * configured ranges. Output is bit-identical for a given seed, spec and grid.
 */
MaterialField generate(const GeomodelSpec& spec, const StructuredGrid& grid);

/// Hydrostatic pore pressure (MPa) at cell centroids: gradient[kPa/m] * depth.
std::vector<double> pressure_from_gradient(const StructuredGrid& grid, double gradient_kpa_per_m,
                                           double depth_of_top);

} // namespace geods
