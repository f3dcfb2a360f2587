#pragma once

#include "geods/downscale.hpp"
#include "geods/fem.hpp"
#include "geods/grid.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace geods {

/// Mean and population standard deviation of absolute percent errors.
struct PercentStats {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

struct ColumnError {
    int column = 0;
    std::size_t cells = 0;
    PercentStats s1, s2, r12;
};

struct DepthBin {
    int k = 0;
    double depth = 0.0; // m, centroid depth below surface
    std::size_t cells = 0;
    double mape_s1 = 0.0, mape_s2 = 0.0, mape_r12 = 0.0;
};

/**
 * Prediction-versus-truth errors over covered cells. Residuals are
 * prediction minus truth; percent errors divide by |truth| and skip cells
 * whose true value (or, for R12, either sigma1) is zero. Per-cell arrays are
 * NaN outside the compared set.
 */
struct ErrorReport {
    std::string method;
    std::vector<double> d_s1, d_s2;   // MPa
    std::vector<double> pe_s1, pe_s2; // signed percent error
    std::vector<double> r12_pred, r12_true;
    std::vector<ColumnError> columns;
    std::vector<DepthBin> depth;
    std::size_t cells = 0;
    std::size_t excluded_zero = 0; // percent-error terms skipped for a zero denominator
    double mse_s1 = 0.0, mse_s2 = 0.0;
    double rmse_s1 = 0.0, rmse_s2 = 0.0;
    PercentStats s1, s2, r12;
};

/**
 * Compares a downscaled volume with the fine truth on cells that are covered,
 * lie in a partition column and, when `column_ids` is non-empty, belong to one
 * of those columns. Throws ShapeError on a grid mismatch.
 */
ErrorReport compare(const DownscaledStress& pred, const StressField& truth,
                    const ColumnPartition& partition, std::span<const int> column_ids = {});

/// Pearson correlation; NaN when either input is constant or sizes differ.
double pearson(std::span<const double> a, std::span<const double> b);

struct ProfilePoint {
    int k = 0;
    double depth = 0.0;
    double value = 0.0;
};

/// Values of a per-cell field down the vertical line (i, j), k from k_begin to k_end.
/// Throws IndexError for a line outside the grid.
std::vector<ProfilePoint> depth_profile(const StructuredGrid& grid, std::span<const double> field,
                                        int i, int j, int k_begin, int k_end);

/// Delimited-text and JSON exports.
std::string columns_csv(const ErrorReport& report);
std::string depth_csv(const ErrorReport& report);
struct NamedProfile {
    std::string name;
    std::vector<ProfilePoint> points;
};
/// One row per layer, one column per series; all series must cover the same layers.
std::string profiles_csv(std::span<const NamedProfile> series);
std::string summary_json(std::span<const ErrorReport> reports);

} // namespace geods
