#pragma once

#include "geods/downscale.hpp"
#include "geods/features.hpp"
#include "geods/fem.hpp"
#include "geods/geomodel.hpp"
#include "geods/grid.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace geods::io {

using Json = nlohmann::ordered_json;

/**
 * Binary container: 8-byte magic, u32 version, u64 header length, a JSON
 * header, then each named array as little-endian float64 in header order.
 */
struct Artifact {
    std::string kind;
    Json meta = Json::object();
    std::vector<std::pair<std::string, std::vector<double>>> arrays;

    const std::vector<double>& array(const std::string& name) const;
    void add(std::string name, std::vector<double> values);
};

std::string encode(const Artifact& artifact);
Artifact decode(std::string_view bytes);
/// Throws DependencyError when the file is missing, IntegrityError when it is malformed.
void write_artifact(const std::filesystem::path& path, const Artifact& artifact);
Artifact read_artifact(const std::filesystem::path& path);

Json grid_to_json(const StructuredGrid& grid);
StructuredGrid grid_from_json(const Json& j);

Artifact to_artifact(const MaterialField& field);
MaterialField material_from(const Artifact& a);

Artifact to_artifact(const StressField& field);
StressField stress_from(const Artifact& a);

Artifact to_artifact(std::span<const TrainingExample> examples);
std::vector<TrainingExample> examples_from(const Artifact& a);

Artifact to_artifact(const DownscaledStress& d);
DownscaledStress downscaled_from(const Artifact& a);

/// Legacy ASCII VTK structured points with one cell scalar. z in the file is depth below the top.
std::string vtk_cell_scalar(const StructuredGrid& grid, const std::string& name,
                            std::span<const double> values);
void write_vtk(const std::filesystem::path& path, const StructuredGrid& grid,
               const std::string& name, std::span<const double> values);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace geods::io
