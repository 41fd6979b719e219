#pragma once

#include <cstdint>

#include "freeshell/layout.hpp"
#include "freeshell/mesh.hpp"

namespace freeshell::fixtures
{

/// Square [0, side]^2 in z = 0 split along its diagonal into 2 triangles.
TargetMesh flat_square(double side = 10.0);

/// The three lateral faces of a regular tetrahedron (base removed).
TargetMesh cone_cap(double side = 10.0);

/// Open hemisphere of the given radius: pole plus rings of 6, 12, 18, 23 and 25 vertices; 143 faces.
TargetMesh hemisphere(double radius = 40.0);

/// Regular grid of (nx + 1) x (ny + 1) vertices in z = 0, each cell split in two.
TargetMesh square_grid(int nx, int ny, double spacing);

/// Grid of equilateral triangles with side `spacing`, rows staggered by half a cell.
TargetMesh equilateral_grid(int nx, int ny, double spacing);

/// Small random height field (dome, saddle or ridge) over a grid, determined by seed.
TargetMesh random_surface(std::uint64_t seed);

/// Layout whose triangles are copies of the mesh laid flat through its own xy coordinates.
Layout planar_layout(const TargetMesh& mesh);

}  // namespace freeshell::fixtures
