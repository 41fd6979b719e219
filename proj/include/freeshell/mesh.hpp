#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace freeshell
{

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Tri = std::array<int, 3>;

/**
 * @brief Indexed triangle mesh of the goal shell.
 *
 * Always constructed through make_target_mesh(), which validates the
 * topology (orientable manifold, every component has a boundary) and
 * computes area-weighted vertex normals and boundary flags.
 */
struct TargetMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    std::vector<Vec3> vertex_normals;
    std::vector<bool> boundary_flags;

    [[nodiscard]] std::size_t vertex_count() const { return vertices.size(); }
    [[nodiscard]] std::size_t triangle_count() const { return triangles.size(); }
};

/** @brief One undirected mesh edge with its incident triangles */
struct MeshEdge {
    int v0{-1};  // v0 < v1
    int v1{-1};
    std::array<int, 2> tris{-1, -1};
    int tri_count{0};

    [[nodiscard]] bool interior() const { return tri_count == 2; }
};

struct EdgeAdjacency {
    std::vector<MeshEdge> edges;
    std::vector<int> interior_edges;
    /// tri_edges[t][c] is the edge between corner c and corner (c+1)%3
    std::vector<std::array<int, 3>> tri_edges;
};

struct EdgeStatistics {
    double avg_edge_len{0};
    double min{0};
    double max{0};
};

/**
 * Validate and build a TargetMesh. Throws TopologyError for out-of-range
 * or repeated indices, non-manifold edges or vertices, inconsistent
 * orientation, unreferenced vertices, degenerate normals, and closed
 * components ("closed surface").
 */
TargetMesh make_target_mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles);

/// Edges are numbered in order of first appearance (triangle order, corner order).
EdgeAdjacency build_edge_adjacency(const std::vector<Tri>& triangles, std::size_t vertex_count);

EdgeStatistics edge_statistics(const TargetMesh& mesh);

/// Boundary loops as ordered vertex lists following the boundary half-edges.
std::vector<std::vector<int>> boundary_loops(const TargetMesh& mesh);

/// Number of face-connected components.
int connected_components(const TargetMesh& mesh);

double triangle_area(const TargetMesh& mesh, int t);

/// Unit face normal.
Vec3 face_normal(const TargetMesh& mesh, int t);

}  // namespace freeshell
