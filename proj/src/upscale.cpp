#include "geods/upscale.hpp"

#include "geods/error.hpp"

#include <string>

namespace geods {

std::vector<double> upscale_property(const ScaleMap& map, std::span<const double> fine_values) {
    const StructuredGrid& fine = map.fine();
    const StructuredGrid& coarse = map.coarse();
    if (fine_values.size() != fine.cell_count()) {
        throw ShapeError("fine field has " + std::to_string(fine_values.size()) +
                         " values, grid has " + std::to_string(fine.cell_count()) + " cells");
    }
    const Ratio3 r = map.ratio();
    // Children fill their parent exactly, so every weight is 1.
    const double w = 1.0;
    std::vector<double> out(coarse.cell_count());
    for (int K = 0; K < coarse.nz(); ++K) {
        for (int J = 0; J < coarse.ny(); ++J) {
            for (int I = 0; I < coarse.nx(); ++I) {
                double sum_xw = 0.0;
                double sum_w = 0.0;
                for (int dk = 0; dk < r.rz; ++dk) {
                    for (int dj = 0; dj < r.ry; ++dj) {
                        for (int di = 0; di < r.rx; ++di) {
                            const std::size_t f = fine.linear_unchecked(
                                {I * r.rx + di, J * r.ry + dj, K * r.rz + dk});
                            sum_xw += fine_values[f] * w;
                            sum_w += w;
                        }
                    }
                }
                out[coarse.linear_unchecked({I, J, K})] = sum_xw / sum_w;
            }
        }
    }
    return out;
}

MaterialField upscale_material(const ScaleMap& map, const MaterialField& fine,
                               double pressure_gradient_kpa_per_m) {
    if (!(fine.grid == map.fine())) {
        throw ShapeError("material grid does not match the fine grid of the scale map");
    }
    MaterialField coarse(map.coarse());
    coarse.E = upscale_property(map, fine.E);
    coarse.nu = upscale_property(map, fine.nu);
    coarse.rho = upscale_property(map, fine.rho);
    coarse.pp = pressure_from_gradient(map.coarse(), pressure_gradient_kpa_per_m,
                                       map.coarse().depth_of_top());
    return coarse;
}

} // namespace geods
