#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "freeshell/flatten.hpp"
#include "freeshell/plate.hpp"

namespace freeshell
{

struct RemeshConfig {
    /// mm; 0 keeps the input triangulation.
    double target_len{0};
    int iters{10};
};

struct VerifyConfig {
    int scan_points_per_tile{20};
    double scan_sigma{0};
    /// Optional XYZ point cloud to measure instead of the synthetic scan.
    std::filesystem::path scan_path;
};

struct PipelineConfig {
    std::filesystem::path input_path;
    std::filesystem::path output_dir{"out"};
    std::uint64_t seed{1};
    RemeshConfig remesh;
    FlattenConfig flatten;
    PlateParams plate;
    VerifyConfig verify;
};

/**
 * Parse "[section]" / "key = value" text. Blank lines and lines starting
 * with '#' or ';' are ignored. Throws ConfigError naming the offending key
 * for unknown sections or keys, malformed values and out-of-range numbers.
 */
PipelineConfig parse_config(const std::string& text, const std::string& origin = "config");
PipelineConfig load_config(const std::filesystem::path& path);

/// Range checks shared by the parser and programmatic callers.
void validate_config(const PipelineConfig& cfg);

/// The full configuration in parseable form, every key present.
std::string format_config(const PipelineConfig& cfg);

}  // namespace freeshell
