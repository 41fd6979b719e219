#pragma once

#include <ostream>
#include <string>

#include "freeshell/config.hpp"

namespace freeshell
{

enum class Stage { remesh, flatten, plate, verify, all };

/// Throws ConfigError for unknown names.
Stage parse_stage(const std::string& name);

/**
 * Artifacts, all inside cfg.output_dir:
 *   remesh  -> mesh.obj
 *   flatten -> layout.obj, linkages.txt, flatten_stats.txt
 *   plate   -> plate.obj, plate.stl, layout.svg, recipe.txt, plate_check.txt
 *   verify  -> report.txt, scan.xyz, distance_report.txt
 * Each stage reads only the artifacts of the stages before it, so stages
 * can be rerun individually. Errors are rethrown with the stage name.
 */
void execute_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log, bool verbose = false);

/// execute_stage() with diagnostics on err; returns 0 on success, 1 on any error.
int run_pipeline(Stage stage, const PipelineConfig& cfg, std::ostream& log, std::ostream& err, bool verbose = false);

}  // namespace freeshell
