#pragma once

#include <array>
#include <span>
#include <vector>

#include "freeshell/mesh.hpp"
#include "freeshell/param.hpp"

namespace freeshell
{

enum class LinkageState { retained, welded, cut };

/**
 * Pairs the two layout copies of one interior mesh edge. Corner fields are
 * global slots (3 * triangle + corner). i, j lie on tri_a and k, m on tri_b,
 * with i matching m and j matching k, so the short edges are (i, m) and
 * (j, k), the long edges (i, j) and (k, m), and the diagonals (i, k) and (j, m).
 */
struct Linkage {
    int tri_a{-1};
    int tri_b{-1};
    int i{-1};
    int j{-1};
    int k{-1};
    int m{-1};
    double rest_len{0};
    LinkageState state{LinkageState::retained};
    int mesh_edge{-1};
};

/// Exploded 2D triangle soup with its linkages.
struct Layout {
    /// corners[3 * t + c] is corner c of triangle t.
    std::vector<Vec2> corners;
    /// rest_edges[t][c] is the 3D length of edge (c, c + 1).
    std::vector<std::array<double, 3>> rest_edges;
    std::vector<Linkage> linkages;
    double avg_edge{0};
    std::vector<int> source_map;

    [[nodiscard]] int triangle_count() const { return static_cast<int>(rest_edges.size()); }
};

/// Private corner copies per triangle and one retained linkage per interior edge.
Layout explode_mesh(const TargetMesh& mesh, const Param2D& init);

/// Mean length of the two short edges.
double gap_value(const Layout& layout, const Linkage& l);

/// Depth-first search over retained and welded linkages from triangle 0.
bool graph_connected(const Layout& layout);

/// Largest gap over linkages that are not cut (0 if there are none).
double max_gap(const Layout& layout);

/// Mean gap over retained linkages (0 if there are none).
double mean_gap(const Layout& layout);

int count_state(const Layout& layout, LinkageState state);

Vec2 triangle_centroid(const Layout& layout, int t);

/**
 * Optimization variables after welding: corners joined by welded linkages
 * share one 2D variable. Classes are numbered by their smallest slot.
 */
struct VariableMap {
    std::vector<int> slot_to_var;
    int var_count{0};
};

VariableMap make_variable_map(const Layout& layout);

/// Flattened 2D variables; a shared variable takes the mean of its corners.
std::vector<double> gather_variables(const Layout& layout, const VariableMap& vars);

/// Write variables back to every corner.
void scatter_variables(std::span<const double> x, const VariableMap& vars, std::span<double> corner_xy);

/// Flattened corner coordinates (x0, y0, x1, y1, ...).
std::vector<double> corner_coordinates(const Layout& layout);
void set_corner_coordinates(Layout& layout, std::span<const double> xy);

}  // namespace freeshell
