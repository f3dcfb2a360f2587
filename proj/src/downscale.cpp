#include "geods/downscale.hpp"

#include "geods/error.hpp"
#include "geods/parallel.hpp"
#include "geods/tensor.hpp"

#include <algorithm>
#include <limits>

namespace geods {

std::string to_string(DownscaleMethod method) {
    return method == DownscaleMethod::ml ? "ml" : "constant_strain";
}

DownscaledStress::DownscaledStress(StructuredGrid g, DownscaleMethod m)
    : grid(g), s1(g.cell_count(), std::numeric_limits<double>::quiet_NaN()),
      s2(g.cell_count(), std::numeric_limits<double>::quiet_NaN()), mask(g.cell_count(), 0),
      method(m) {}

std::size_t DownscaledStress::covered() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

namespace {

void check_grids(const ScaleMap& map, const MaterialField& fine, const StressField& coarse_stress) {
    if (!(fine.grid == map.fine()) || !(coarse_stress.grid == map.coarse())) {
        throw ShapeError("fields do not match the scale map grids");
    }
}

} // namespace

DownscaledStress predict_volume(const nn::NetworkModel& model, const ScaleMap& map,
                                const MaterialField& fine, const MaterialField& coarse,
                                const StressField& coarse_stress, int threads) {
    if (model.layout_hash != channel_layout_hash()) {
        throw IntegrityError("model channel layout " + model.layout_hash +
                             " does not match this build (" + channel_layout_hash() + ")");
    }
    if (!model.norm) {
        throw IntegrityError("model has no normalization statistics");
    }
    check_grids(map, fine, coarse_stress);
    if (!(coarse.grid == map.coarse())) {
        throw ShapeError("coarse material does not match the scale map");
    }
    DownscaledStress out(map.fine(), DownscaleMethod::ml);
    const auto n = static_cast<std::ptrdiff_t>(map.fine().cell_count());
    parallel_for(0, n, threads, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        for (std::ptrdiff_t c = lo; c < hi; ++c) {
            const auto cell = static_cast<std::size_t>(c);
            const auto ex = build_predictors(map, fine, coarse, coarse_stress, cell);
            if (!ex) continue;
            const auto y = nn::predict_denormalized(model, *ex);
            // sigma1 <= sigma2 by definition of the principal ordering.
            out.s1[cell] = std::min(y[0], y[1]);
            out.s2[cell] = std::max(y[0], y[1]);
            out.mask[cell] = 1;
        }
    });
    return out;
}

DownscaledStress constant_strain_downscale(const ScaleMap& map, const StressField& coarse_stress,
                                           const MaterialField& fine, int threads) {
    if (coarse_stress.eps.size() != map.coarse().cell_count()) {
        throw DependencyError("coarse strain field is missing; rerun the coarse solve");
    }
    check_grids(map, fine, coarse_stress);
    DownscaledStress out(map.fine(), DownscaleMethod::constant_strain);
    const auto n = static_cast<std::ptrdiff_t>(map.fine().cell_count());
    parallel_for(0, n, threads, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        for (std::ptrdiff_t c = lo; c < hi; ++c) {
            const auto cell = static_cast<std::size_t>(c);
            const std::size_t parent = map.enclosing_coarse_cell(cell);
            // Effective stress, compression positive: -C(E, nu) : eps.
            const SymTensor s = hooke(lame_from(fine.E[cell] * 1e3, fine.nu[cell]),
                                      coarse_stress.eps[parent]);
            const SymTensor eff{-s.xx, -s.yy, -s.zz, -s.yz, -s.xz, -s.xy};
            const Principal p = principal_stresses(eff);
            out.s1[cell] = p.values[0];
            out.s2[cell] = p.values[1];
            out.mask[cell] = 1;
        }
    });
    return out;
}

} // namespace geods
