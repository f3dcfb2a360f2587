#pragma once

#include "geods/config.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geods {

enum class Stage { build, solve_coarse, solve_fine, extract, train, predict, baseline, report };

inline constexpr Stage kAllStages[] = {Stage::build,   Stage::solve_coarse, Stage::solve_fine,
                                       Stage::extract, Stage::train,        Stage::predict,
                                       Stage::baseline, Stage::report};

std::string stage_name(Stage stage);
/// Throws ConfigError for an unknown name.
Stage parse_stage(const std::string& name);

/// Hash of the configuration sections a stage depends on (excludes threads and output_dir).
std::string stage_config_hash(Stage stage, const RunConfig& config);

/// Per-stage record of the configuration and file hashes behind its outputs.
struct Manifest {
    std::string stage;
    std::string config_hash;
    std::map<std::string, std::string> inputs;  // "<stage>/<file>" -> sha256
    std::map<std::string, std::string> outputs; // file -> sha256
    Json meta = Json::object();
};

std::filesystem::path manifest_path(const RunConfig& config, Stage stage);
std::optional<Manifest> read_manifest(const RunConfig& config, Stage stage);

struct StageResult {
    Stage stage;
    bool ran = false; // false when the stage was already up to date
    Manifest manifest;
};

/**
 * Runs one stage, reading upstream artifacts from config.output_dir.
 * Missing upstream outputs raise DependencyError naming the stage to run;
 * upstream outputs produced under a different configuration, or modified
 * since, raise StaleArtifactError. An up-to-date stage is skipped unless
 * `force` is set.
 */
StageResult run_stage(Stage stage, const RunConfig& config, bool force = false);

/// All stages in order.
std::vector<StageResult> run_pipeline(const RunConfig& config, bool force = false);

} // namespace geods
