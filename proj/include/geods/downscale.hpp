#pragma once

#include "geods/features.hpp"
#include "geods/fem.hpp"
#include "geods/geomodel.hpp"
#include "geods/grid.hpp"
#include "geods/nn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace geods {

enum class DownscaleMethod { ml, constant_strain };

std::string to_string(DownscaleMethod method);

/// Fine-scale sigma1, sigma2 (MPa). Uncovered cells hold NaN and mask 0.
struct DownscaledStress {
    StructuredGrid grid;
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<std::uint8_t> mask;
    DownscaleMethod method = DownscaleMethod::ml;

    DownscaledStress(StructuredGrid g, DownscaleMethod m);
    std::size_t covered() const;
};

/**
 * Runs the network on every fine cell with a full neighbourhood. The two
 * outputs are stored in ascending order, so s1 <= s2 in every covered cell.
 * Throws IntegrityError when the model was trained on a different channel
 * layout or carries no normalization statistics.
 */
DownscaledStress predict_volume(const nn::NetworkModel& model, const ScaleMap& map,
                                const MaterialField& fine, const MaterialField& coarse,
                                const StressField& coarse_stress, int threads = 1);

/**
 * Hooke's law with the fine-cell stiffness and the strain of the enclosing
 * coarse cell; covers every fine cell. Throws DependencyError when the coarse
 * field carries no strain.
 */
DownscaledStress constant_strain_downscale(const ScaleMap& map, const StressField& coarse_stress,
                                           const MaterialField& fine, int threads = 1);

} // namespace geods
