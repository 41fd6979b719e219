#pragma once

#include <array>
#include <vector>

#include "freeshell/mesh.hpp"

namespace freeshell
{

/// 2D parameterization: one uv per vertex plus each triangle laid flat isometrically.
struct Param2D {
    std::vector<Vec2> uv;
    /// frames[t][c] is corner c of triangle t in its own isometric 2D frame.
    std::vector<std::array<Vec2, 3>> frames;
};

struct ArapOptions {
    int max_iters{100};
    double tol{1e-7};
};

/// Isometric 2D copies of every 3D triangle: corner 0 at the origin, edge 01 on +x.
std::vector<std::array<Vec2, 3>> rest_frames(const TargetMesh& mesh);

/**
 * Uniform-weight Tutte embedding. The longest boundary loop is mapped to a
 * circle by arc length (radius = perimeter / 2pi); every other vertex,
 * including vertices on hole boundaries, satisfies the uniform Laplacian.
 * Throws TopologyError for meshes with more than one component.
 */
Param2D tutte_embed(const TargetMesh& mesh);

/**
 * Local/global ARAP with clamped cotangent weights and a free boundary.
 * Vertex 0 is pinned to its initial position to fix the translation; the
 * system matrix is factorized once. When history is non-null it receives
 * the energy after every local step (the first entry is the initial energy).
 */
Param2D arap_parameterize(const TargetMesh& mesh, const Param2D& init, const ArapOptions& opts = {},
                          std::vector<double>* history = nullptr);

/// ARAP energy of uv with per-triangle optimal rotations.
double arap_energy(const TargetMesh& mesh, const Param2D& param);

/// Cotangent half-weights per triangle corner edge: w[t][c] belongs to edge (c, c+1).
std::vector<std::array<double, 3>> arap_weights(const std::vector<std::array<Vec2, 3>>& frames);

}  // namespace freeshell
