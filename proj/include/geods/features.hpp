#pragma once

#include "geods/fem.hpp"
#include "geods/geomodel.hpp"
#include "geods/grid.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace geods {

using Block = std::array<double, 27>;

/// Offset (di, dj, dk) in {-1,0,1}^3 maps to (di+1) + 3(dj+1) + 9(dk+1); entry 0 is (-1,-1,-1).
constexpr int block_index(int di, int dj, int dk) { return (di + 1) + 3 * (dj + 1) + 9 * (dk + 1); }

/**
 * One fine cell's predictors and targets.
 *
 * s1_star/s2_star hold the coarse principal stresses of the 27 coarse cells
 * around the enclosing coarse cell. dE/dnu hold, for each of the 27 fine
 * neighbours, the fine value minus the value of that neighbour's own
 * enclosing coarse cell.
 */
struct TrainingExample {
    Block s1_star{};   // MPa
    Block s2_star{};   // MPa
    Block dE{};        // GPa
    Block dnu{};       // -
    double p_fine = 0.0;  // MPa
    double p_star = 0.0;  // MPa
    double s3_star = 0.0; // MPa
    std::array<double, 2> target{}; // fine sigma1, sigma2, MPa
    std::size_t cell_id = 0;

    friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

enum Channel : int { s1_star = 0, s2_star, delta_E, delta_nu, p_fine, p_star, s3_star };
inline constexpr int kBlockChannels = 4;
inline constexpr int kScalarChannels = 3;
inline constexpr int kInputChannels = kBlockChannels + kScalarChannels;
inline constexpr int kTargets = 2;

/// Text description of the channel layout and units; its hash binds models to features.
const std::string& channel_layout();
std::string channel_layout_hash();

/// True when the 27 fine neighbours and the 27 coarse neighbours of the enclosing cell exist.
bool has_full_neighborhood(const ScaleMap& map, Index3 fine_cell);

/// Predictors for one fine cell (target left zero); nullopt on an incomplete neighbourhood.
std::optional<TrainingExample> build_predictors(const ScaleMap& map, const MaterialField& fine,
                                                const MaterialField& coarse,
                                                const StressField& coarse_stress,
                                                std::size_t fine_cell);

struct ExtractionResult {
    std::vector<TrainingExample> examples; // ascending cell id
    std::size_t skipped = 0;               // cells with incomplete neighbourhoods
};

/// Throws DependencyError when either stress field is missing.
ExtractionResult extract_examples(const ScaleMap& map, const MaterialField& fine,
                                  const MaterialField& coarse, const StressField* fine_stress,
                                  const StressField* coarse_stress,
                                  std::span<const std::size_t> cells);

struct NormalizationStats {
    std::array<double, kInputChannels> input_mean{};
    std::array<double, kInputChannels> input_std{1, 1, 1, 1, 1, 1, 1};
    std::array<double, kTargets> target_mean{};
    std::array<double, kTargets> target_std{1, 1};

    friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

/**
 * Per-channel z-score statistics (population standard deviation). Block
 * channels pool all 27 entries. A zero-variance channel keeps its mean and
 * gets std 1 with a logged warning.
 */
NormalizationStats fit_normalization(std::span<const TrainingExample> examples);

/// Network-ready input: four blocks and three scalars, normalized.
struct NetInput {
    std::array<Block, kBlockChannels> blocks{};
    std::array<double, kScalarChannels> scalars{};
};

NetInput normalize(const TrainingExample& example, const NormalizationStats& stats);
std::array<double, kTargets> normalize_target(const std::array<double, kTargets>& y,
                                              const NormalizationStats& stats);
std::array<double, kTargets> denormalize_target(const std::array<double, kTargets>& y,
                                                const NormalizationStats& stats);
/// Inverse of normalize() on the predictor channels.
TrainingExample denormalize(const NetInput& input, const NormalizationStats& stats);

struct DataSplit {
    std::vector<int> train_columns;
    std::vector<int> validation_columns;
};

/// Assigns examples to sets by the column of their cell; examples outside both sets are dropped.
std::pair<std::vector<TrainingExample>, std::vector<TrainingExample>> split_by_columns(
    const ColumnPartition& partition, const DataSplit& split,
    std::span<const TrainingExample> examples);

} // namespace geods
