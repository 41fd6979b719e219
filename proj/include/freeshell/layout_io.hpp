#pragma once

#include <filesystem>
#include <string>

#include "freeshell/flatten.hpp"
#include "freeshell/layout.hpp"
#include "freeshell/mesh.hpp"

namespace freeshell
{

/// Layout corners as an OBJ soup with z = 0, one face per triangle.
std::string layout_obj_text(const Layout& layout);

/// One "id tri_a tri_b state gap" line per linkage.
std::string linkage_text(const Layout& layout);

/// Key = value summary of a flattening run.
std::string flatten_stats_text(const FlattenStats& stats, const Layout& layout);

/// One line per coarse iteration: iter, energy terms, a_max, cut_count.
std::string coarse_record_line(const CoarseRecord& rec);

void save_layout(const Layout& layout, const std::filesystem::path& obj_path,
                 const std::filesystem::path& linkage_path);

/**
 * Rebuild a layout from the mesh it was flattened from plus the saved
 * corners and linkage states. Throws ParseError when the files do not
 * match the mesh.
 */
Layout load_layout(const TargetMesh& mesh, const std::filesystem::path& obj_path,
                   const std::filesystem::path& linkage_path);

}  // namespace freeshell
