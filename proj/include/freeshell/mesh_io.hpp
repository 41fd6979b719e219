#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "freeshell/mesh.hpp"

namespace freeshell
{

enum class MeshFormat { OBJ, STL };

/// Raw indexed geometry without topology guarantees (triangle soups, solids).
struct TriangleSoup {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
};

/// STL vertices closer than this are merged on load.
inline constexpr double kStlMergeTolerance = 1e-5;

/**
 * Read an OBJ or STL file (format chosen by extension, case-insensitive).
 * Polygonal OBJ faces are fan-split. Throws ParseError on malformed input,
 * TopologyError if the geometry is not a valid TargetMesh.
 */
TargetMesh load_mesh(const std::filesystem::path& path);

/// Geometry only, no validation.
TriangleSoup read_soup(const std::filesystem::path& path);

void save_mesh(const TargetMesh& mesh, const std::filesystem::path& path, MeshFormat format);
void save_mesh(const TriangleSoup& soup, const std::filesystem::path& path, MeshFormat format);

MeshFormat format_from_path(const std::filesystem::path& path);

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double value);

/// Append a binary STL facet (normal computed from the vertices).
void append_stl_facet(std::string& buffer, const Vec3& a, const Vec3& b, const Vec3& c);

void write_stl_file(const std::filesystem::path& path, const std::string& facets, std::uint32_t count);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace freeshell
