#include "geods/geomodel.hpp"

#include "geods/error.hpp"
#include "geods/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace geods {

MaterialField::MaterialField(StructuredGrid g)
    : grid(std::move(g)), E(grid.cell_count(), 0.0), nu(grid.cell_count(), 0.0),
      rho(grid.cell_count(), 0.0), pp(grid.cell_count(), 0.0) {}

MaterialField::MaterialField(StructuredGrid g, double E_const, double nu_const, double rho_const,
                             double pp_const)
    : grid(std::move(g)), E(grid.cell_count(), E_const), nu(grid.cell_count(), nu_const),
      rho(grid.cell_count(), rho_const), pp(grid.cell_count(), pp_const) {}

namespace {

void check_range(const Range& r, double lo, double hi, const char* name) {
    if (!(r.lo <= r.hi) || r.lo < lo || r.hi > hi) {
        throw ConfigError(std::string(name) + " range [" + std::to_string(r.lo) + ", " +
                          std::to_string(r.hi) + "] outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    }
}

// Stationary Gaussian-covariance field on the horizontal plane, built from
// random Fourier features. Unit variance in expectation.
class LateralField {
public:
    static constexpr int kHarmonics = 64;

    LateralField(Rng& rng, double correlation_length) {
        const double k_std = std::numbers::sqrt2 / correlation_length;
        for (int m = 0; m < kHarmonics; ++m) {
            kx_[m] = k_std * rng.normal();
            ky_[m] = k_std * rng.normal();
            phase_[m] = 2.0 * std::numbers::pi * rng.uniform();
        }
    }

    double operator()(double x, double y) const {
        double s = 0.0;
        for (int m = 0; m < kHarmonics; ++m) {
            s += std::cos(kx_[m] * x + ky_[m] * y + phase_[m]);
        }
        return s * std::sqrt(2.0 / kHarmonics);
    }

private:
    double kx_[kHarmonics];
    double ky_[kHarmonics];
    double phase_[kHarmonics];
};

struct Layer {
    double top = 0.0; // nominal depth below grid top, before folding
    double E = 0.0, nu = 0.0, rho = 0.0;
};

} // namespace

void validate(const GeomodelSpec& spec) {
    if (spec.n_layers < 1) {
        throw ConfigError("n_layers must be >= 1");
    }
    if (!(spec.layer_thickness.lo > 0.0) || spec.layer_thickness.hi < spec.layer_thickness.lo) {
        throw ConfigError("layer thickness range must be positive and ordered");
    }
    if (!(spec.lateral_correlation_length > 0.0)) {
        throw ConfigError("lateral_correlation_length must be > 0");
    }
    if (spec.lateral_relative_std < 0.0) {
        throw ConfigError("lateral_relative_std must be >= 0");
    }
    if (spec.fold_amplitude < 0.0) {
        throw ConfigError("fold_amplitude must be >= 0");
    }
    if (spec.fold_amplitude > 0.0 && !(spec.fold_width > 0.0)) {
        throw ConfigError("fold_width must be > 0 when a fold is present");
    }
    if (!(spec.pressure_gradient > 0.0)) {
        throw ConfigError("pressure_gradient must be > 0");
    }
    check_range(spec.youngs, kYoungsMinGPa, kYoungsMaxGPa, "Young's modulus");
    check_range(spec.poisson, kPoissonMin, kPoissonMax, "Poisson's ratio");
    check_range(spec.density, kDensityMin, kDensityMax, "density");
}

MaterialField generate(const GeomodelSpec& spec, const StructuredGrid& grid) {
    validate(spec);
    Rng rng(spec.seed);

    std::vector<Layer> layers(static_cast<std::size_t>(spec.n_layers));
    double top = 0.0;
    for (auto& layer : layers) {
        layer.top = top;
        top += rng.uniform(spec.layer_thickness.lo, spec.layer_thickness.hi);
        layer.E = rng.uniform(spec.youngs.lo, spec.youngs.hi);
        layer.nu = rng.uniform(spec.poisson.lo, spec.poisson.hi);
        layer.rho = rng.uniform(spec.density.lo, spec.density.hi);
    }

    // Three independent lateral fields per layer (E, nu, rho), drawn in layer order.
    std::vector<LateralField> fields;
    fields.reserve(layers.size() * 3);
    for (std::size_t l = 0; l < layers.size() * 3; ++l) {
        fields.emplace_back(rng, spec.lateral_correlation_length);
    }

    const bool fold_along_ns = spec.fold_axis == HorizontalAxis::north_south;
    const Vec3 extent = grid.extent();
    const double center =
        spec.fold_center.value_or(fold_along_ns ? grid.origin()[0] + 0.5 * extent[0]
                                                : grid.origin()[1] + 0.5 * extent[1]);
    const double two_w2 = 2.0 * spec.fold_width * spec.fold_width;

    MaterialField out(grid);
    const auto nxy = static_cast<std::size_t>(grid.nx()) * grid.ny();
    // Lateral field values cached per (layer, property, column).
    std::vector<double> cache(layers.size() * 3 * nxy, std::nan(""));

    for (int k = 0; k < grid.nz(); ++k) {
        const double z_local = (k + 0.5) * grid.dz();
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) {
                const Vec3 c = grid.centroid({i, j, k});
                const double across = fold_along_ns ? c[0] : c[1];
                const double d = across - center;
                const double uplift =
                    spec.fold_amplitude > 0.0 ? spec.fold_amplitude * std::exp(-d * d / two_w2)
                                              : 0.0;
                const double nominal = z_local + uplift;
                auto it = std::upper_bound(layers.begin(), layers.end(), nominal,
                                           [](double v, const Layer& l) { return v < l.top; });
                const std::size_t l = static_cast<std::size_t>(
                    std::max<std::ptrdiff_t>(0, std::distance(layers.begin(), it) - 1));
                const Layer& layer = layers[l];
                const std::size_t column = static_cast<std::size_t>(i) + grid.nx() * j;

                auto noise = [&](std::size_t p) {
                    double& slot = cache[(l * 3 + p) * nxy + column];
                    if (std::isnan(slot)) {
                        slot = fields[l * 3 + p](c[0], c[1]);
                    }
                    return slot;
                };
                auto vary = [&](double mean, std::size_t p, const Range& r) {
                    if (spec.lateral_relative_std == 0.0) {
                        return mean;
                    }
                    const double v = mean * (1.0 + spec.lateral_relative_std * noise(p));
                    return std::clamp(v, r.lo, r.hi);
                };

                const std::size_t id = grid.linear_unchecked({i, j, k});
                out.E[id] = vary(layer.E, 0, spec.youngs);
                out.nu[id] = vary(layer.nu, 1, spec.poisson);
                out.rho[id] = vary(layer.rho, 2, spec.density);
            }
        }
    }
    out.pp = pressure_from_gradient(grid, spec.pressure_gradient, grid.depth_of_top());
    return out;
}

std::vector<double> pressure_from_gradient(const StructuredGrid& grid, double gradient_kpa_per_m,
                                           double depth_of_top) {
    if (!(gradient_kpa_per_m > 0.0)) {
        throw ConfigError("pressure gradient must be > 0");
    }
    std::vector<double> pp(grid.cell_count());
    const std::size_t per_layer = static_cast<std::size_t>(grid.nx()) * grid.ny();
    for (int k = 0; k < grid.nz(); ++k) {
        const double depth = depth_of_top + (k + 0.5) * grid.dz();
        const double p = gradient_kpa_per_m * 1e-3 * depth;
        std::fill_n(pp.begin() + static_cast<std::ptrdiff_t>(per_layer * k), per_layer, p);
    }
    return pp;
}

} // namespace geods
