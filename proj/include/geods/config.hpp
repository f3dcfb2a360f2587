#pragma once

#include "geods/fem.hpp"
#include "geods/geomodel.hpp"
#include "geods/grid.hpp"
#include "geods/nn.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace geods {

struct GridConfig {
    Dims3 fine{64, 64, 128};
    Vec3 spacing{73.2, 73.2, 18.0}; // m
    Vec3 origin{0.0, 0.0, 0.0};
    double depth_of_top = 3350.0; // m
    Ratio3 refinement{2, 2, 8};

    StructuredGrid fine_grid() const;
};

struct LoadConfig {
    double strain_ew = 1.0e-5;
    double strain_ns = 1.5e-4;
    /// Density (g/cm3) of the rock above the model; the top face carries
    /// rho * g * depth_of_top. Zero leaves the top traction free.
    double overburden_density = 2.3;
    double gravity = fem::kDefaultGravity;
};

struct PartitionConfig {
    int n_columns_x = 4;
    int n_columns_y = 4;
    int discard_top = 8;
    int discard_bottom = 8;
    std::vector<int> train_columns{5};
    std::vector<int> validation_columns{6};
};

struct ReportConfig {
    /// Vertical lines (i, j) on the fine grid exported as depth profiles.
    std::vector<std::array<int, 2>> wells{{24, 24}, {32, 32}, {40, 40}};
};

struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 1;
    std::filesystem::path output_dir = "run";
    GridConfig grid;
    GeomodelSpec geomodel;
    LoadConfig loads;
    fem::SolverSettings solver;
    nn::TrainSettings training;
    PartitionConfig partition;
    ReportConfig report;
};

using Json = nlohmann::ordered_json;

/// Full configuration as JSON; every field is present.
Json to_json(const RunConfig& config);

/// Missing keys take defaults; unknown keys, bad types and invalid values throw ConfigError.
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Default configuration document printed by `config init`.
std::string default_config_text();

/// Throws ConfigError naming the first invalid setting.
void validate(const RunConfig& config);

fem::BoundaryConditions boundary_conditions(const RunConfig& config);

} // namespace geods
