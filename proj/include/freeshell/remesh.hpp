#pragma once

#include "freeshell/mesh.hpp"

namespace freeshell
{

/**
 * Isotropic remeshing: split edges longer than 4/3 target, collapse edges
 * shorter than 4/5 target, flip toward valence 6 (4 on the boundary), and
 * relax tangentially with projection back onto the input surface.
 *
 * Boundary vertices never move. A boundary vertex is only removed when it
 * lies on a straight run of the boundary, so the boundary polyline is kept.
 * Edges are processed in ascending index order; the result is deterministic.
 *
 * Throws DomainError for target_len <= 0 and RemeshError if an iteration
 * leaves a configuration that does not validate as a TargetMesh.
 */
TargetMesh isotropic_remesh(const TargetMesh& mesh, double target_len, int iters = 10);

/// Smallest interior angle over all triangles, in degrees.
double min_triangle_angle_deg(const TargetMesh& mesh);

}  // namespace freeshell
